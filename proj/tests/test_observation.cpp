#include <doctest.h>

#include <cmath>

#include "lnafim/errors.hpp"
#include "support.hpp"

using namespace lnafim;

namespace {

ObservationDesign with_times(Regime r, std::vector<double> times, std::vector<int> observed,
                             double s2 = 0.0) {
  ObservationDesign d;
  d.name = to_string(r);
  d.regime = r;
  d.times = std::move(times);
  d.observed = std::move(observed);
  d.sigma_eps2 = s2;
  return d;
}

}  // namespace

TEST_CASE("TP covariance is block diagonal") {
  const ReactionNetwork net = test::load_model("p53");
  const Vector th = test::load_params(net, "p53");
  const MomentStack s = compute_moments(net, th, test::equidistant(Regime::TP, 5, 0.7, {0, 2}), {}, true);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) {
        CHECK(s.Sigma.block(2 * i, 2 * j, 2, 2).isZero(0.0));
        for (const Matrix& d : s.dSigma) CHECK(d.block(2 * i, 2 * j, 2, 2).isZero(0.0));
      }
}

TEST_CASE("DT covariance is the measurement error only") {
  const ReactionNetwork net = parse_model(test::kGeneText);
  const MomentStack s = compute_moments(net, test::gene_reference_theta(),
                                        test::equidistant(Regime::DT, 3, 1.0, {1}, 0.25));
  CHECK(s.Sigma == 0.25 * Matrix::Identity(3, 3));
  for (const Matrix& d : s.dSigma) CHECK(d.isZero(0.0));
}

TEST_CASE("TS covariance of two stationary protein samples") {
  const ReactionNetwork net = parse_model(test::kGeneText);
  const MomentStack s = compute_moments(net, test::gene_reference_theta(),
                                        with_times(Regime::TS, {0.0, 1.0}, {1}));
  const double Vrp = 40.0 / 1.7, Vpp = 400.0 / 7.0 * (1.0 + 4.0 / 1.7);
  const double phi21 = 4.0 * (std::exp(-0.7) - std::exp(-1.0)) / 0.3;
  const double c = Vrp * phi21 + Vpp * std::exp(-0.7);
  CHECK(s.Sigma(0, 0) == doctest::Approx(Vpp).epsilon(1e-9));
  CHECK(s.Sigma(1, 1) == doctest::Approx(Vpp).epsilon(1e-9));
  CHECK(s.Sigma(0, 1) == doctest::Approx(c).epsilon(1e-8));
  CHECK(s.Sigma(1, 0) == s.Sigma(0, 1));
  CHECK(c == doctest::Approx(135.53).epsilon(1e-4));
  CHECK(s.mu[0] == doctest::Approx(400.0 / 7.0));
}

TEST_CASE("stationary blocks do not depend on time") {
  const ReactionNetwork net = test::load_model("gene");
  const Vector th = test::load_params(net, "gene");
  const MomentStack s = compute_moments(net, th, test::equidistant(Regime::TS, 6, 1.5, {0, 1}), {}, false);
  for (int i = 1; i < 6; ++i) {
    CHECK(test::max_rel_diff(s.Sigma.block(2 * i, 2 * i, 2, 2), s.Sigma.block(0, 0, 2, 2)) < 1e-9);
    CHECK(test::max_rel_diff(s.mu.segment(2 * i, 2), s.mu.segment(0, 2)) < 1e-9);
  }
  for (int i = 0; i + 1 < 6; ++i)
    CHECK(test::max_rel_diff(s.Sigma.block(2 * i, 2 * i + 2, 2, 2), s.Sigma.block(0, 2, 2, 2)) < 1e-8);
}

TEST_CASE("one time point: TS equals TP") {
  const ReactionNetwork net = test::load_model("p53");
  const Vector th = test::load_params(net, "p53");
  const MomentStack ts = compute_moments(net, th, test::equidistant(Regime::TS, 1, 2.0, {0, 1, 2}));
  const MomentStack tp = compute_moments(net, th, test::equidistant(Regime::TP, 1, 2.0, {0, 1, 2}));
  CHECK(ts.Sigma == tp.Sigma);
  CHECK(ts.mu == tp.mu);
}

TEST_CASE("moment derivatives equal central differences") {
  for (const char* name : {"gene", "p53"}) {
    const ReactionNetwork net = test::load_model(name);
    const Vector th = test::load_params(net, name);
    for (Regime r : {Regime::TS, Regime::TP}) {
      ObservationDesign d = test::equidistant(r, 4, 1.3, {0, net.num_species() - 1});
      d.init = InitialCondition::stationary(2.0, 4.0);
      SolverConfig tight;
      tight.rtol = 1e-11;
      tight.atol = 1e-12;
      const MomentStack s = compute_moments(net, th, d, tight);
      for (int l = 0; l < net.num_params(); ++l) {
        const double h = 1e-5 * th[l];
        Vector tp = th, tm = th;
        tp[l] += h;
        tm[l] -= h;
        const MomentStack p = compute_moments(net, tp, d, tight, false);
        const MomentStack m = compute_moments(net, tm, d, tight, false);
        const Vector dmu = (p.mu - m.mu) / (2 * h);
        const Matrix dS = (p.Sigma - m.Sigma) / (2 * h);
        const auto ul = static_cast<std::size_t>(l);
        CHECK(test::max_rel_diff(s.dmu[ul], dmu, 1e-6 * std::max(1.0, dmu.cwiseAbs().maxCoeff())) < 1e-4);
        CHECK(test::max_rel_diff(s.dSigma[ul], dS, 1e-6 * std::max(1.0, dS.cwiseAbs().maxCoeff())) < 1e-4);
        CHECK(s.dSigma[ul] == s.dSigma[ul].transpose());
      }
    }
  }
}

TEST_CASE("multivariate normal density") {
  MomentStack s;
  s.mu = Vector::Zero(2);
  s.Sigma = Matrix::Identity(2, 2);
  CHECK(mvn_loglik(s, Vector::Zero(2)) == doctest::Approx(-1.837877).epsilon(1e-6));
  s.mu = Vector::Zero(1);
  s.Sigma = Matrix::Constant(1, 1, 4.0);
  CHECK(mvn_loglik(s, Vector::Constant(1, 2.0)) == doctest::Approx(-2.112086).epsilon(1e-6));
  // the density peaks at the mean
  Matrix S(2, 2);
  S << 2.0, 0.6, 0.6, 1.0;
  const MvnDensity d(Vector::Ones(2), S);
  const double top = d.log_pdf(Vector::Ones(2));
  for (int k = 0; k < 2; ++k)
    for (double h : {-1e-4, 1e-4}) {
      Vector y = Vector::Ones(2);
      y[k] += h;
      CHECK(d.log_pdf(y) < top);
    }
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  s.mu = Vector::Zero(2);
  s.Sigma = bad;
  CHECK_THROWS_AS(mvn_loglik(s, Vector::Zero(2)), NumericalError);
}

TEST_CASE("design validation") {
  const ReactionNetwork net = parse_model(test::kGeneText);
  CHECK_THROWS_AS(test::equidistant(Regime::DT, 3, 1.0, {1}, 0.0).validate(net), InputError);
  CHECK_THROWS_AS(test::equidistant(Regime::TS, 3, 1.0, {1, 1}).validate(net), InputError);
  CHECK_THROWS_AS(test::equidistant(Regime::TS, 3, 1.0, {2}).validate(net), InputError);
  CHECK_THROWS_AS(with_times(Regime::TS, {1.0, 0.5}, {0}).validate(net), InputError);
  CHECK_THROWS_AS(regime_from_string("XX"), InputError);
  CHECK(regime_from_string("TP") == Regime::TP);
  const Matrix P = test::equidistant(Regime::TS, 1, 1.0, {1}).projection(2);
  CHECK(P.rows() == 1);
  CHECK(P(0, 1) == 1.0);
  CHECK(P(0, 0) == 0.0);
}

TEST_CASE("jitter is added to the diagonal") {
  const ReactionNetwork net = parse_model(test::kGeneText);
  const ObservationDesign d = test::equidistant(Regime::TP, 2, 1.0, {1});
  const MomentStack a = compute_moments(net, test::gene_reference_theta(), d, {}, false, 0.0);
  const MomentStack b = compute_moments(net, test::gene_reference_theta(), d, {}, false, 1e-3);
  CHECK(((b.Sigma - a.Sigma) - 1e-3 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(b.jitter == 1e-3);
}
