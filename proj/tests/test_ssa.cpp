#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lnafim/errors.hpp"
#include "support.hpp"

using namespace lnafim;

TEST_CASE("birth-death stationary law is Poisson") {
  const ReactionNetwork net = parse_model(test::kBirthDeathText);
  Vector th(2);
  th << 10.0, 1.0;
  const std::vector<long long> x0{0};
  const std::vector<double> times{20.0};
  const SsaSummary s = summarize(ssa_simulate(net, th, x0, times, 100000, 11));
  CHECK(std::abs(s.mean[0][0] - 10.0) <= 3 * s.mean_se[0][0]);
  CHECK(std::abs(s.cov[0][0](0, 0) - 10.0) <= 3 * s.cov_se[0][0](0, 0));
}

TEST_CASE("a network with zero rates stays put") {
  const ReactionNetwork net = parse_model(test::kBirthDeathText);
  const std::vector<long long> x0{7};
  const std::vector<double> times{0.0, 1.0, 100.0};
  const SsaEnsemble e = ssa_simulate(net, Vector::Zero(2), x0, times, 20, 3);
  for (int i = 0; i < 20; ++i)
    for (int t = 0; t < 3; ++t) CHECK(e.at(i, t, 0) == 7);
  CHECK(e.total_events == 0);
}

TEST_CASE("fixed seed reproduces every sample") {
  const ReactionNetwork net = test::load_model("gene");
  const Vector th = test::load_params(net, "gene");
  const std::vector<long long> x0{50, 32};
  const std::vector<double> times{0.5, 1.0, 3.0};
  const SsaEnsemble a = kernels::ssa_serial(net, th, x0, times, 500, 99);
  const SsaEnsemble b = kernels::ssa_parallel(net, th, x0, times, 500, 99);
  const SsaEnsemble c = kernels::ssa_parallel(net, th, x0, times, 500, 99);
  CHECK(a.samples == b.samples);
  CHECK(b.samples == c.samples);
  CHECK(a.total_events == b.total_events);
  const SsaEnsemble d = kernels::ssa_parallel(net, th, x0, times, 500, 100);
  CHECK(d.samples != a.samples);
  // a trajectory does not depend on the ensemble size
  const SsaEnsemble small = kernels::ssa_serial(net, th, x0, times, 10, 99);
  CHECK(std::equal(small.samples.begin(), small.samples.end(), a.samples.begin()));
}

TEST_CASE("gene stationary ensemble matches the stationary LNA") {
  const ReactionNetwork net = test::load_model("gene");
  const Vector th = test::load_params(net, "gene");
  const StationaryState ss = stationary_state(net, th, std::nullopt, {}, false);
  const std::vector<long long> x0{std::llround(ss.phi[0]), std::llround(ss.phi[1])};
  const std::vector<double> times{60.0};
  const SsaSummary s = summarize(ssa_simulate(net, th, x0, times, 20000, 5));
  for (int i = 0; i < 2; ++i) CHECK(std::abs(s.mean[0][i] - ss.phi[i]) <= 3 * s.mean_se[0][i]);
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) CHECK(std::abs(s.cov[0][0](i, j) - ss.V(i, j)) <= 3 * s.cov_se[0][0](i, j));
}

TEST_CASE("summary statistics by hand") {
  SsaEnsemble e;
  e.count = 4;
  e.num_species = 1;
  e.times = {0.0, 1.0};
  e.samples = {1, 2, 3, 4, 5, 6, 7, 8};  // trajectories (1,2) (3,4) (5,6) (7,8)
  const SsaSummary s = summarize(e);
  CHECK(s.mean[0][0] == doctest::Approx(4.0));
  CHECK(s.mean[1][0] == doctest::Approx(5.0));
  CHECK(s.cov[0][0](0, 0) == doctest::Approx(20.0 / 3.0));
  CHECK(s.cov[0][1](0, 0) == doctest::Approx(20.0 / 3.0));
  CHECK(s.mean_se[0][0] == doctest::Approx(std::sqrt(20.0 / 3.0 / 4.0)));
}

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::span<const double>()) == 0.0);
  std::vector<double> tiny(1 << 20, 0.1);
  CHECK(std::abs(pairwise_sum(tiny) - 0.1 * (1 << 20)) < 1e-6);
}

TEST_CASE("invalid simulation inputs") {
  const ReactionNetwork net = parse_model(test::kBirthDeathText);
  Vector th(2);
  th << 1.0, 1.0;
  const std::vector<double> times{1.0};
  const std::vector<long long> neg{-1};
  CHECK_THROWS_AS(ssa_simulate(net, th, neg, times, 10, 1), InputError);
  const std::vector<long long> two{1, 2};
  CHECK_THROWS_AS(ssa_simulate(net, th, two, times, 10, 1), InputError);
  const std::vector<long long> ok{1};
  const std::vector<double> backwards{2.0, 1.0};
  CHECK_THROWS_AS(ssa_simulate(net, th, ok, backwards, 10, 1), InputError);
  Vector bad(2);
  bad << -1.0, 1.0;
  CHECK_THROWS_AS(ssa_simulate(net, bad, ok, times, 10, 1), NumericalError);
}
