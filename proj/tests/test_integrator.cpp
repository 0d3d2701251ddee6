#include <doctest.h>

#include <cmath>

#include "lnafim/errors.hpp"
#include "lnafim/integrator.hpp"

using namespace lnafim;

TEST_CASE("exponential decay to tolerance") {
  DormandPrince45 dp(SolverConfig{});
  Eigen::VectorXd y(1);
  y << 1.0;
  dp.integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& d) { d = -v; }, 0.0, 5.0, y);
  CHECK(y[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-7));
}

TEST_CASE("harmonic oscillator over many periods") {
  SolverConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  DormandPrince45 dp(cfg);
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  auto rhs = [](double, const Eigen::VectorXd& v, Eigen::VectorXd& d) {
    d[0] = v[1];
    d[1] = -v[0];
  };
  const double T = 20.0 * std::acos(-1.0);
  for (int i = 0; i < 10; ++i) dp.integrate(rhs, T * i / 10, T * (i + 1) / 10, y);
  CHECK(std::abs(y[0] - 1.0) < 1e-7);
  CHECK(std::abs(y[1]) < 1e-7);
}

TEST_CASE("time-dependent right-hand side lands exactly on the end point") {
  DormandPrince45 dp(SolverConfig{});
  Eigen::VectorXd y(1);
  y << 0.0;
  dp.integrate([](double t, const Eigen::VectorXd&, Eigen::VectorXd& d) { d[0] = 3 * t * t; }, 0.0,
               2.0, y);
  CHECK(y[0] == doctest::Approx(8.0).epsilon(1e-9));
  // intervals whose end is a sliver beyond a natural step
  for (double t1 : {0.0257191, 0.1 + 1e-15, 1.0 / 3.0}) {
    DormandPrince45 d2(SolverConfig{});
    Eigen::VectorXd z(1);
    z << 1.0;
    CHECK_NOTHROW(d2.integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& d) { d = -0.1 * v; },
                               0.0, t1, z));
    CHECK(z[0] == doctest::Approx(std::exp(-0.1 * t1)).epsilon(1e-9));
  }
}

TEST_CASE("halving the tolerance changes the answer by less than ten tolerances") {
  auto run = [](double rtol) {
    SolverConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = rtol * 1e-2;
    DormandPrince45 dp(cfg);
    Eigen::VectorXd y(2);
    y << 2.0, 0.0;
    dp.integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& d) {
      d[0] = v[1];
      d[1] = (1 - v[0] * v[0]) * v[1] - v[0];
    }, 0.0, 5.0, y);
    return y;
  };
  const Eigen::VectorXd a = run(1e-8), b = run(5e-9);
  CHECK((a - b).cwiseAbs().maxCoeff() < 10 * 1e-8 * (1 + a.cwiseAbs().maxCoeff()));
}

TEST_CASE("failures are reported") {
  SolverConfig cfg;
  cfg.max_steps = 10;
  DormandPrince45 dp(cfg);
  Eigen::VectorXd y(1);
  y << 1.0;
  CHECK_THROWS_AS(dp.integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& d) { d = -1000 * v; },
                               0.0, 100.0, y),
                  NumericalError);
  DormandPrince45 blow(SolverConfig{});
  y << 1.0;
  CHECK_THROWS_AS(blow.integrate([](double, const Eigen::VectorXd& v, Eigen::VectorXd& d) { d = v.array().square(); },
                                 0.0, 2.0, y),
                  NumericalError);
  SolverConfig bad;
  bad.rtol = -1.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
}
