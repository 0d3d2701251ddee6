#include <doctest.h>

#include <random>

#include "lnafim/errors.hpp"
#include "support.hpp"

using namespace lnafim;

TEST_CASE("gene stationary moments by hand") {
  const ReactionNetwork net = parse_model(test::kGeneText);
  const Vector th = test::gene_reference_theta();
  const StationaryState ss = stationary_state(net, th);
  CHECK(ss.phi[0] == doctest::Approx(10.0).epsilon(1e-10));
  CHECK(ss.phi[1] == doctest::Approx(400.0 / 7.0).epsilon(1e-10));
  const double Vrp = 4.0 * 10.0 / 1.7;
  const double Vpp = 400.0 / 7.0 * (1.0 + 4.0 / 1.7);
  CHECK(ss.V(0, 0) == doctest::Approx(10.0).epsilon(1e-10));
  CHECK(ss.V(0, 1) == doctest::Approx(Vrp).epsilon(1e-10));
  CHECK(ss.V(1, 0) == ss.V(0, 1));
  CHECK(ss.V(1, 1) == doctest::Approx(Vpp).epsilon(1e-10));
  CHECK(ss.V(0, 1) == doctest::Approx(23.52941).epsilon(1e-6));
  CHECK(ss.V(1, 1) == doctest::Approx(191.59664).epsilon(1e-6));
  CHECK(ss.V(0, 1) / std::sqrt(ss.V(0, 0) * ss.V(1, 1)) == doctest::Approx(0.5376).epsilon(1e-3));
}

TEST_CASE("decay-only and decoupled networks") {
  const ReactionNetwork decay = parse_model(test::kDecayText);
  const StationaryState ss = stationary_state(decay, Vector::Ones(1), Vector::Constant(1, 5.0));
  CHECK(std::abs(ss.phi[0]) < 1e-12);
  CHECK(std::abs(ss.V(0, 0)) < 1e-12);

  const ReactionNetwork gene = parse_model(test::kGeneText);
  Vector th = test::gene_reference_theta();
  th[1] = 0.0;
  const StationaryState g = stationary_state(gene, th, std::nullopt, {}, false);
  CHECK(g.V(0, 1) == 0.0);
  CHECK(std::abs(g.phi[1]) < 1e-12);
}

TEST_CASE("Lyapunov solver against the Kronecker oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  for (int N : {1, 2, 3, 5}) {
    for (int trial = 0; trial < 20; ++trial) {
      Matrix B(N, N);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) B(i, j) = n01(rng);
      // shift into the left half plane
      const double shift = Eigen::EigenSolver<Matrix>(B).eigenvalues().real().maxCoeff() + 0.5;
      const Matrix A = B - shift * Matrix::Identity(N, N);
      Matrix G(N, N);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) G(i, j) = n01(rng);
      const Matrix Q = G * G.transpose();
      const Matrix X = solve_lyapunov(A, Q);
      CHECK(X == X.transpose());
      CHECK(test::max_rel_diff(X, test::lyapunov_kron(A, Q), 1e-12 * X.cwiseAbs().maxCoeff()) < 1e-9);
    }
  }
}

TEST_CASE("Lyapunov residual at the bundled stationary points") {
  for (const char* name : {"gene", "p53"}) {
    const ReactionNetwork net = test::load_model(name);
    const Vector th = test::load_params(net, name);
    const StationaryState ss = stationary_state(net, th);
    const Matrix A = jacobian_A(net, ss.phi, th);
    const Matrix D = diffusion_D(net, ss.phi, th);
    const Matrix res = A * ss.V + ss.V * A.transpose() + D;
    CHECK(res.cwiseAbs().maxCoeff() < 1e-9 * D.cwiseAbs().maxCoeff());
    CHECK((net.stoichiometry_real() * drift_F(net, ss.phi, th)).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1.0, ss.phi.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("stationary sensitivities equal differences of stationary solves") {
  for (const char* name : {"gene", "p53"}) {
    const ReactionNetwork net = test::load_model(name);
    const Vector th = test::load_params(net, name);
    const StationaryState ss = stationary_state(net, th);
    REQUIRE(ss.has_sensitivities);
    for (int l = 0; l < net.num_params(); ++l) {
      const double h = 1e-5 * th[l];
      Vector tp = th, tm = th;
      tp[l] += h;
      tm[l] -= h;
      const StationaryState p = stationary_state(net, tp, ss.phi, {}, false);
      const StationaryState m = stationary_state(net, tm, ss.phi, {}, false);
      const auto ul = static_cast<std::size_t>(l);
      const Vector dphi = (p.phi - m.phi) / (2 * h);
      const Matrix dV = (p.V - m.V) / (2 * h);
      CHECK(test::max_rel_diff(ss.dphi[ul], dphi, 1e-6 * std::max(1.0, dphi.cwiseAbs().maxCoeff())) < 1e-5);
      CHECK(test::max_rel_diff(ss.dV[ul], dV, 1e-6 * std::max(1.0, dV.cwiseAbs().maxCoeff())) < 1e-5);
    }
  }
}

TEST_CASE("stationary initial condition agrees with long integration") {
  const ReactionNetwork net = test::load_model("p53");
  const Vector th = test::load_params(net, "p53");
  const StationaryState ss = stationary_state(net, th, std::nullopt, {}, false);
  const std::vector<double> times{0.0, 150.0};
  const LnaTrajectory traj = integrate_lna(
      net, th, InitialCondition::explicit_state(0.5 * ss.phi, Matrix::Zero(3, 3)), times, {}, false);
  CHECK(test::max_rel_diff(traj.phi[1], ss.phi, 1.0) < 1e-6);
  CHECK(test::max_rel_diff(traj.V[1], ss.V, 1.0) < 1e-6);
}

TEST_CASE("unstable fixed points are reported") {
  // autocatalysis with immigration has no fixed point
  const ReactionNetwork net = parse_model(
      "species x\nparams a b\nreaction x -> 2 * x @ a * x\nreaction 0 -> x @ b\n");
  Vector th(2);
  th << 1.0, 1.0;
  CHECK_THROWS_AS(stationary_state(net, th, Vector::Constant(1, 1.0)), NumericalError);

  Matrix A(2, 2);
  A << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(solve_lyapunov(A, Matrix::Identity(2, 2)), NumericalError);

  const ReactionNetwork p53 = test::load_model("p53");
  Vector osc = test::load_params(p53, "p53");
  osc[p53.param_index("k")] = 0.01;
  osc[p53.param_index("a_0")] = 0.8;
  bool reported = false;
  try {
    stationary_state(p53, osc);
  } catch (const NumericalError& e) {
    reported = std::string(e.what()).find("no stable stationary LNA") != std::string::npos;
  }
  CHECK(reported);
}
