#include "lnafim/ssa.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <random>

#include <omp.h>

namespace lnafim {

namespace {

void check_inputs(const ReactionNetwork& net, const Vector& theta, std::span<const long long> x0,
                  std::span<const double> times, int count) {
  if (static_cast<int>(x0.size()) != net.num_species())
    throw InputError("initial state has the wrong number of species");
  for (long long v : x0)
    if (v < 0) throw InputError("initial copy numbers must be nonnegative");
  if (theta.size() != net.num_params()) throw InputError("parameter vector has the wrong length");
  if (times.empty()) throw InputError("no sampling times");
  if (!(times[0] >= 0.0)) throw InputError("sampling times must be >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InputError("sampling times must be strictly increasing");
  if (count < 1) throw InputError("trajectory count must be >= 1");
}

std::mt19937_64 trajectory_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Simulates one trajectory, writing times.size() * N samples to `out`.
long long simulate_one(const ReactionNetwork& net, const Vector& theta,
                       std::span<const long long> x0, std::span<const double> times,
                       std::uint64_t seed, std::uint64_t index, long long* out) {
  const Kinetics& kin = net.kinetics();
  const Eigen::MatrixXi& S = net.stoichiometry();
  const int N = net.num_species();
  const int R = net.num_reactions();
  std::mt19937_64 rng = trajectory_engine(seed, index);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<long long> x(x0.begin(), x0.end());
  Vector xd(N);
  Vector a(R);
  double t = 0.0;
  std::size_t next = 0;
  long long events = 0;
  auto record = [&] {
    for (int i = 0; i < N; ++i) out[next * static_cast<std::size_t>(N) + static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
    ++next;
  };

  while (next < times.size()) {
    for (int i = 0; i < N; ++i) xd[i] = static_cast<double>(x[static_cast<std::size_t>(i)]);
    kin.rates(xd.data(), theta.data(), t, a);
    double a0 = 0.0;
    for (int j = 0; j < R; ++j) {
      if (a[j] < 0.0)
        throw NumericalError("ssa_simulate", "negative propensity for reaction " +
                                                 std::to_string(j + 1) + " at t=" + std::to_string(t));
      a0 += a[j];
    }
    if (!(a0 > 0.0)) {
      while (next < times.size()) record();
      break;
    }
    const double tau = -std::log(1.0 - unif(rng)) / a0;
    while (next < times.size() && t + tau > times[next]) record();
    if (next == times.size()) break;
    t += tau;
    const double target = unif(rng) * a0;
    double acc = 0.0;
    int j = 0;
    for (; j < R - 1; ++j) {
      acc += a[j];
      if (target < acc) break;
    }
    while (a[j] == 0.0 && j > 0) --j;  // round-off guard at the top end
    for (int i = 0; i < N; ++i) {
      x[static_cast<std::size_t>(i)] += S(i, j);
      if (x[static_cast<std::size_t>(i)] < 0)
        throw NumericalError("ssa_simulate", "negative copy number (rate law fires without reactants)");
    }
    if (++events > kMaxEventsPerTrajectory)
      throw NumericalError("ssa_simulate", "runaway trajectory: more than 1e9 events");
  }
  return events;
}

SsaEnsemble prepare(const ReactionNetwork& net, std::span<const double> times, int count,
                    std::uint64_t seed) {
  SsaEnsemble ens;
  ens.seed = seed;
  ens.count = count;
  ens.num_species = net.num_species();
  ens.times.assign(times.begin(), times.end());
  ens.samples.resize(static_cast<std::size_t>(count) * times.size() *
                     static_cast<std::size_t>(net.num_species()));
  return ens;
}

}  // namespace

namespace kernels {

SsaEnsemble ssa_serial(const ReactionNetwork& net, const Vector& theta,
                       std::span<const long long> x0, std::span<const double> times, int count,
                       std::uint64_t seed) {
  check_inputs(net, theta, x0, times, count);
  SsaEnsemble ens = prepare(net, times, count, seed);
  const std::size_t stride = times.size() * static_cast<std::size_t>(net.num_species());
  for (int i = 0; i < count; ++i)
    ens.total_events += simulate_one(net, theta, x0, times, seed, static_cast<std::uint64_t>(i),
                                     ens.samples.data() + static_cast<std::size_t>(i) * stride);
  return ens;
}

SsaEnsemble ssa_parallel(const ReactionNetwork& net, const Vector& theta,
                         std::span<const long long> x0, std::span<const double> times, int count,
                         std::uint64_t seed) {
  check_inputs(net, theta, x0, times, count);
  SsaEnsemble ens = prepare(net, times, count, seed);
  const std::size_t stride = times.size() * static_cast<std::size_t>(net.num_species());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  long long events = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : events)
  for (int i = 0; i < count; ++i) {
    try {
      events += simulate_one(net, theta, x0, times, seed, static_cast<std::uint64_t>(i),
                             ens.samples.data() + static_cast<std::size_t>(i) * stride);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  ens.total_events = events;
  return ens;
}

}  // namespace kernels

SsaEnsemble ssa_simulate(const ReactionNetwork& net, const Vector& theta,
                         std::span<const long long> x0, std::span<const double> times, int count,
                         std::uint64_t seed, ExecPolicy policy) {
  return policy == ExecPolicy::Serial ? kernels::ssa_serial(net, theta, x0, times, count, seed)
                                      : kernels::ssa_parallel(net, theta, x0, times, count, seed);
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace {

// Mean and standard error (sample std / sqrt(n)) of a per-trajectory statistic.
std::pair<double, double> mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = pairwise_sum(v) / n;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  const double var = v.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  return {m, std::sqrt(var / n)};
}

}  // namespace

SsaSummary summarize(const SsaEnsemble& ens) {
  SsaSummary out;
  out.count = ens.count;
  out.times = ens.times;
  const int T = static_cast<int>(ens.times.size());
  const int N = ens.num_species;
  const int n = ens.count;
  const double corr = n > 1 ? static_cast<double>(n) / (n - 1.0) : 1.0;
  std::vector<double> buf(static_cast<std::size_t>(n));

  out.mean.assign(static_cast<std::size_t>(T), Vector(N));
  out.mean_se.assign(static_cast<std::size_t>(T), Vector(N));
  for (int a = 0; a < T; ++a)
    for (int i = 0; i < N; ++i) {
      for (int r = 0; r < n; ++r) buf[static_cast<std::size_t>(r)] = static_cast<double>(ens.at(r, a, i));
      const auto [m, se] = mean_and_se(buf);
      out.mean[static_cast<std::size_t>(a)][i] = m;
      out.mean_se[static_cast<std::size_t>(a)][i] = se;
    }

  out.cov.assign(static_cast<std::size_t>(T), std::vector<Matrix>(static_cast<std::size_t>(T), Matrix(N, N)));
  out.cov_se = out.cov;
  for (int a = 0; a < T; ++a)
    for (int b = 0; b < T; ++b)
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          const double mi = out.mean[static_cast<std::size_t>(a)][i];
          const double mj = out.mean[static_cast<std::size_t>(b)][j];
          for (int r = 0; r < n; ++r)
            buf[static_cast<std::size_t>(r)] =
                (static_cast<double>(ens.at(r, a, i)) - mi) * (static_cast<double>(ens.at(r, b, j)) - mj);
          const auto [m, se] = mean_and_se(buf);
          out.cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)](i, j) = corr * m;
          out.cov_se[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)](i, j) = corr * se;
        }
  return out;
}

}  // namespace lnafim
