#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lnafim/fisher.hpp"
#include "lnafim/network.hpp"

namespace lnafim {

/// Raw samples of an exact stochastic simulation ensemble.
///
/// Trajectory i draws from std::mt19937_64 seeded with
/// std::seed_seq{seed_lo, seed_hi, i_lo, i_hi} (32-bit halves), so every
/// trajectory has its own documented stream and the ensemble does not
/// depend on how trajectories are scheduled across threads.
struct SsaEnsemble {
  std::uint64_t seed = 0;
  int count = 0;
  int num_species = 0;
  std::vector<double> times;
  std::vector<long long> samples;  // [trajectory][time][species]
  long long total_events = 0;

  long long at(int traj, int time, int species) const {
    return samples[(static_cast<std::size_t>(traj) * times.size() + static_cast<std::size_t>(time)) *
                       static_cast<std::size_t>(num_species) +
                   static_cast<std::size_t>(species)];
  }
};

/// Monte-Carlo moments with standard errors (sample std of the per-
/// trajectory statistic / sqrt(count)).
struct SsaSummary {
  int count = 0;
  std::vector<double> times;
  std::vector<Vector> mean, mean_se;  // [time]
  /// cov[a][b](i, j) = cov(x_i(t_a), x_j(t_b)), all a, b.
  std::vector<std::vector<Matrix>> cov, cov_se;
};

inline constexpr long long kMaxEventsPerTrajectory = 1000000000LL;

namespace kernels {
SsaEnsemble ssa_serial(const ReactionNetwork& net, const Vector& theta,
                       std::span<const long long> x0, std::span<const double> times, int count,
                       std::uint64_t seed);
SsaEnsemble ssa_parallel(const ReactionNetwork& net, const Vector& theta,
                         std::span<const long long> x0, std::span<const double> times, int count,
                         std::uint64_t seed);
}  // namespace kernels

/// Gillespie direct method. Throws InputError for invalid x0/times,
/// NumericalError for negative propensities or runaway trajectories.
SsaEnsemble ssa_simulate(const ReactionNetwork& net, const Vector& theta,
                         std::span<const long long> x0, std::span<const double> times, int count,
                         std::uint64_t seed, ExecPolicy policy = ExecPolicy::Parallel);

/// Deterministic (fixed-order pairwise) reduction of an ensemble.
SsaSummary summarize(const SsaEnsemble& ens);

/// Pairwise summation in a fixed order.
double pairwise_sum(std::span<const double> v);

}  // namespace lnafim
