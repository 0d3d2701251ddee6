#include <doctest.h>

#include <cmath>
#include <random>

#include "lnafim/errors.hpp"
#include "support.hpp"

using namespace lnafim;

namespace {

MomentStack scalar_stack(double mu_deriv, double sigma, double sigma_deriv) {
  MomentStack s;
  s.mu = Vector::Zero(1);
  s.Sigma = Matrix::Constant(1, 1, sigma);
  s.dmu = {Vector::Constant(1, mu_deriv)};
  s.dSigma = {Matrix::Constant(1, 1, sigma_deriv)};
  s.num_times = 1;
  s.num_observed = 1;
  return s;
}

Matrix sym2(double a, double b, double c) {
  Matrix m(2, 2);
  m << a, b, b, c;
  return m;
}

}  // namespace

TEST_CASE("one-dimensional Gaussian information") {
  for (ExecPolicy p : {ExecPolicy::Serial, ExecPolicy::Parallel}) {
    CHECK(compute_fim(scalar_stack(1.0, 2.0, 0.0), p)(0, 0) == doctest::Approx(0.5));
    CHECK(compute_fim(scalar_stack(0.0, 1.0, 1.0), p)(0, 0) == doctest::Approx(0.5));
  }
  MomentStack none = scalar_stack(1.0, 1.0, 0.0);
  none.dmu.clear();
  none.dSigma.clear();
  CHECK_THROWS_AS(compute_fim(none), NumericalError);
  CHECK_THROWS_AS(compute_fim(scalar_stack(1.0, -1.0, 0.0)), NumericalError);
}

TEST_CASE("eigen analysis examples") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4.0, 1.0;
  EigenAnalysis ea = eigen_analysis(d);
  CHECK(ea.values[0] == doctest::Approx(4.0));
  CHECK(ea.values[1] == doctest::Approx(1.0));
  CHECK((ea.vectors - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  ea = eigen_analysis(sym2(2, 1, 2));
  CHECK(ea.values[0] == doctest::Approx(3.0));
  CHECK(ea.values[1] == doctest::Approx(1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(ea.vectors(0, 0) - r) < 1e-12);
  CHECK(std::abs(ea.vectors(0, 1) - r) < 1e-12);
  CHECK(std::abs(std::abs(ea.vectors(1, 0)) - r) < 1e-12);
  CHECK(ea.vectors(1, 0) * ea.vectors(1, 1) < 0.0);

  CHECK(eigen_analysis(Matrix::Zero(3, 3)).values.isZero(0.0));
}

TEST_CASE("sensitivity coefficients") {
  Vector lam(2);
  lam << 4.0, 1.0;
  SensitivityCoefficients s = sensitivity_coefficients(lam, Matrix::Identity(2, 2));
  CHECK(s.S2[0] == doctest::Approx(4.0));
  CHECK(s.S2[1] == doctest::Approx(1.0));
  CHECK(s.T[0] == doctest::Approx(0.8));
  CHECK(s.T[1] == doctest::Approx(0.2));

  const EigenAnalysis ea = eigen_analysis(sym2(2, 1, 2));
  s = sensitivity_coefficients(ea.values, ea.vectors);
  CHECK(s.S2[0] == doctest::Approx(2.0));
  CHECK(s.S2[1] == doctest::Approx(2.0));
  CHECK(s.T[0] == doctest::Approx(0.5));

  const Matrix F = sym2(5, -2, 3);
  const EigenAnalysis e1 = eigen_analysis(F), e2 = eigen_analysis(7.5 * F);
  const Vector t1 = sensitivity_coefficients(e1.values, e1.vectors).T;
  const Vector t2 = sensitivity_coefficients(e2.values, e2.vectors).T;
  CHECK((t1 - t2).cwiseAbs().maxCoeff() < 1e-14);

  const EigenAnalysis z = eigen_analysis(Matrix::Zero(2, 2));
  s = sensitivity_coefficients(z.values, z.vectors);
  CHECK_FALSE(s.T_defined);
  CHECK(std::isnan(s.T[0]));
}

TEST_CASE("neutral ellipse examples") {
  NeutralEllipse e = neutral_ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2), 1.0, 0, 1);
  CHECK(e.bounded);
  for (const auto& p : e.points) CHECK(std::hypot(p[0], p[1]) == doctest::Approx(1.0));

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4.0, 1.0;
  e = neutral_ellipsoid(d, Vector::Zero(2), 1.0, 0, 1);
  const double lo = std::min(e.semi_axes[0], e.semi_axes[1]);
  const double hi = std::max(e.semi_axes[0], e.semi_axes[1]);
  CHECK(lo == doctest::Approx(0.5));
  CHECK(hi == doctest::Approx(1.0));
  for (const auto& p : e.points) CHECK(4 * p[0] * p[0] + p[1] * p[1] == doctest::Approx(1.0));

  e = neutral_ellipsoid(sym2(1, 0, 0), Vector::Zero(2), 1.0, 0, 1);
  CHECK_FALSE(e.bounded);
  CHECK(e.points.empty());
  CHECK(!e.unbounded_note.empty());

  CHECK_THROWS_AS(neutral_ellipsoid(d, Vector::Zero(2), 0.0, 0, 1), InputError);
  CHECK_THROWS_AS(neutral_ellipsoid(d, Vector::Zero(2), 1.0, 1, 1), InputError);
}

TEST_CASE("profile and slice cross-sections") {
  Matrix F(3, 3);
  F << 4, 1, 1, 1, 3, 0.5, 1, 0.5, 2;
  const NeutralEllipse slice = neutral_ellipsoid(F, Vector::Zero(3), 1.0, 0, 1, CrossSection::Slice);
  CHECK((slice.form - F.topLeftCorner(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  const NeutralEllipse prof = neutral_ellipsoid(F, Vector::Zero(3), 1.0, 0, 1, CrossSection::Profile);
  // profile form is the inverse of the (0,1) block of the covariance F^-1
  const Matrix expected = F.inverse().topLeftCorner(2, 2).inverse();
  CHECK((prof.form - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ellipse is unchanged when the matrix and threshold scale together") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix G(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) G(i, j) = n01(rng);
    const Matrix F = G * G.transpose() + 0.1 * Matrix::Identity(4, 4);
    const Vector c = Vector::Random(4);
    for (CrossSection mode : {CrossSection::Profile, CrossSection::Slice}) {
      const NeutralEllipse a = neutral_ellipsoid(F, c, 0.3, 1, 3, mode, 64);
      const NeutralEllipse b = neutral_ellipsoid(F * 16.0, c, 0.3 * 16.0, 1, 3, mode, 64);
      REQUIRE(a.points.size() == b.points.size());
      for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(std::abs(a.points[i][0] - b.points[i][0]) < 1e-12);
        CHECK(std::abs(a.points[i][1] - b.points[i][1]) < 1e-12);
      }
    }
  }
}

TEST_CASE("rank, Cramer-Rao bounds and optimality scalars") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4.0, 1.0;
  CramerRaoBounds cr = cramer_rao(d);
  CHECK_FALSE(cr.singular);
  CHECK(cr.bounds[0] == doctest::Approx(0.25));
  CHECK(cr.bounds[1] == doctest::Approx(1.0));
  cr = cramer_rao(sym2(2, 1, 2));
  CHECK(cr.bounds[0] == doctest::Approx(2.0 / 3.0));
  CHECK(cr.bounds[1] == doctest::Approx(2.0 / 3.0));
  cr = cramer_rao(sym2(1, 1, 1));
  CHECK(cr.singular);
  CHECK(cr.rank == 1);

  OptimalityScalars o = optimality_scalars(d);
  CHECK(o.log_det == doctest::Approx(std::log(4.0)));
  CHECK(o.trace_inverse == doctest::Approx(1.25));
  o = optimality_scalars(Matrix::Identity(5, 5));
  CHECK(std::abs(o.log_det) < 1e-15);
  CHECK(o.trace_inverse == doctest::Approx(5.0));
  o = optimality_scalars(sym2(1, 1, 1));
  CHECK(o.singular);
  CHECK(o.log_det == -std::numeric_limits<double>::infinity());
  CHECK(o.trace_inverse == std::numeric_limits<double>::infinity());

  Vector lam(4);
  lam << 10.0, 1.0, 1e-8, 0.0;
  CHECK(identifiability_rank(lam) == 2);
  CHECK(identifiability_rank(lam, 1e-10) == 3);
  CHECK(identifiability_rank(Vector::Zero(3)) == 0);
}

TEST_CASE("gene identifiability counts at the bundled point") {
  const ReactionNetwork net = test::load_model("gene");
  const Vector th = test::load_params(net, "gene");
  const int expected[] = {4, 2, 1};
  int i = 0;
  for (const char* file : {"gene_ts.json", "gene_tp.json", "gene_dt.json"}) {
    const Matrix F = design_fim(net, th, test::load_design(net, file));
    CHECK(identifiability_rank(eigen_analysis(F).values) == expected[i++]);
  }
}

TEST_CASE("serial and parallel FIM kernels agree") {
  for (const char* name : {"gene", "p53"}) {
    const ReactionNetwork net = test::load_model(name);
    const Vector th = test::load_params(net, name);
    for (Regime r : {Regime::TS, Regime::TP, Regime::DT}) {
      const MomentStack s = compute_moments(
          net, th, test::equidistant(r, 12, 0.8, {0, 1}, r == Regime::DT ? 1.0 : 0.0));
      const Matrix a = kernels::fim_serial(s);
      const Matrix b = kernels::fim_parallel(s);
      CHECK(test::max_rel_diff(a, b, 1e-12 * a.cwiseAbs().maxCoeff()) < 1e-9);
      CHECK(b == b.transpose());
      // scheduling does not change a single bit
      CHECK(kernels::fim_parallel(s) == b);
    }
  }
}

TEST_CASE("FIM is positive semidefinite and TP information is additive") {
  std::mt19937_64 rng(21);
  const ReactionNetwork net = test::load_model("gene");
  const Vector th0 = test::load_params(net, "gene");
  for (int trial = 0; trial < 10; ++trial) {
    const Vector th = test::random_point(th0, 2.0, rng);
    for (Regime r : {Regime::TS, Regime::TP, Regime::DT}) {
      const Matrix F = design_fim(net, th, test::equidistant(r, 8, 1.0, {1}, r == Regime::DT ? 2.0 : 0.0));
      const EigenAnalysis ea = eigen_analysis(F);
      CHECK(ea.min_raw >= -1e-9 * ea.values[0]);
    }
    ObservationDesign d = test::equidistant(Regime::TP, 5, 1.0, {0, 1});
    d.init = InitialCondition::stationary(3.0, 2.0);
    // separate integrations: tolerances tight enough that step histories do not matter
    FimOptions tight;
    tight.solver.rtol = 1e-12;
    tight.solver.atol = 1e-14;
    const Matrix whole = design_fim(net, th, d, tight);
    Matrix sum = Matrix::Zero(4, 4);
    for (double t : d.times) {
      ObservationDesign one = d;
      one.times = {t};
      sum += design_fim(net, th, one, tight);
    }
    CHECK((whole - sum).cwiseAbs().maxCoeff() < 1e-10 * whole.norm());
  }
}

TEST_CASE("appending a TP time never loses information") {
  const ReactionNetwork net = test::load_model("p53");
  const Vector th = test::load_params(net, "p53");
  ObservationDesign d = test::equidistant(Regime::TP, 1, 0.5, {0, 2});
  d.init = InitialCondition::stationary(1.5, 2.0);
  Vector prev = eigen_analysis(design_fim(net, th, d)).values;
  for (int n = 2; n <= 6; ++n) {
    d.times.push_back(0.5 * n);
    const Matrix F = design_fim(net, th, d);
    const Vector now = eigen_analysis(F).values;
    for (Eigen::Index i = 0; i < now.size(); ++i) CHECK(now[i] >= prev[i] - 1e-10 * now[0]);
    prev = now;
  }
}

TEST_CASE("log and natural scales have the same rank") {
  for (const char* name : {"gene", "p53"}) {
    const ReactionNetwork net = test::load_model(name);
    const Vector th = test::load_params(net, name);
    for (Regime r : {Regime::TS, Regime::TP, Regime::DT}) {
      const ObservationDesign d = test::equidistant(r, 10, 1.0, {0}, r == Regime::DT ? 1.0 : 0.0);
      FimOptions nat;
      nat.scale = ParamScale::Natural;
      const Matrix Fn = design_fim(net, th, d, nat);
      const Matrix Fl = design_fim(net, th, d);
      CHECK(test::max_rel_diff(Fl, to_log_scale(Fn, th), 1e-12 * Fl.cwiseAbs().maxCoeff()) < 1e-12);
      const int rn = identifiability_rank(eigen_analysis(Fn).values, 1e-12);
      const int rl = identifiability_rank(eigen_analysis(Fl).values, 1e-12);
      CHECK(rn == rl);
    }
  }
  CHECK_THROWS_AS(to_log_scale(Matrix::Identity(2, 2), Vector::Constant(2, -1.0)), InputError);
}

TEST_CASE("FIM report") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4.0, 1.0;
  const FimReport r = make_fim_report(d, {"a", "b"}, Vector::Ones(2), ParamScale::Log);
  CHECK(r.rank == 2);
  CHECK(r.opt.log_det == doctest::Approx(std::log(4.0)));
  CHECK(r.cr.bounds[0] == doctest::Approx(0.25));
}
