#pragma once

#include <cstdint>
#include <span>

#include "lnafim/design.hpp"
#include "lnafim/ssa.hpp"

namespace lnafim {

/// Solver settings used by the finite-difference oracle: tight enough that
/// re-integration noise stays far below the differencing error.
SolverConfig oracle_solver_config(const SolverConfig& base = {});

struct FdFim {
  Matrix fim;               // symmetrized
  double asymmetry = 0.0;   // max |I - I^T| before symmetrization
};

/// FIM with dmu/dtheta and dSigma/dtheta replaced by central differences of
/// fully re-integrated moments (no variational equations). Log scale
/// perturbs log theta_k by +-step; natural scale perturbs theta_k by
/// +-step * theta_k.
FdFim fd_fim(const ReactionNetwork& net, const Vector& theta, const ObservationDesign& design,
             double step = 1e-5, ParamScale scale = ParamScale::Log,
             const SolverConfig& cfg = oracle_solver_config());

struct ScoreCheck {
  int draws = 0;
  Vector mean;    // MC mean score
  Vector mean_se;
  Matrix cov;     // MC covariance of the score
  Matrix cov_se;
};

/// Monte-Carlo check of E[score] = 0 and Cov[score] = I. Draws come from
/// N(truth.mu, truth.Sigma); the score is a central difference of the log
/// density between the `plus[k]` and `minus[k]` stacks (parameters moved by
/// +-step along coordinate k). Throws InputError("empty ensemble") for
/// draws < 1.
ScoreCheck score_check(const MomentStack& truth, std::span<const MomentStack> plus,
                       std::span<const MomentStack> minus, double step, int draws,
                       std::uint64_t seed);

/// Convenience wrapper building the perturbed stacks for `design`.
ScoreCheck score_check(const ReactionNetwork& net, const Vector& theta,
                       const ObservationDesign& design, int draws, std::uint64_t seed,
                       double step = 1e-4, ParamScale scale = ParamScale::Log,
                       const SolverConfig& cfg = oracle_solver_config());

/// One predicted-vs-Monte-Carlo comparison.
struct MomentCheck {
  std::string name;
  double predicted = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  bool pass = false;
};

struct SsaStationaryCheck {
  int trajectories = 0;
  double burn_in = 0.0;
  std::vector<double> lags;
  std::vector<MomentCheck> checks;
  bool all_pass = false;
};

/// Compares SSA moments with the stationary LNA: means, lag-0 covariances
/// and lag covariances cov(x(s), x(s + lag)) = V* Phi(lag)^T. Trajectories
/// start at round(phi*) and are sampled after a burn-in of
/// 10 / min |Re eig(A)|. A check passes when |estimate - predicted| <=
/// `sigmas` * se.
SsaStationaryCheck ssa_stationary_check(const ReactionNetwork& net, const Vector& theta,
                                        std::vector<double> lags, int trajectories,
                                        std::uint64_t seed, double sigmas = 3.0,
                                        ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace lnafim
