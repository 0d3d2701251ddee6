#pragma once

#include <string>
#include <vector>

#include "lnafim/lna.hpp"

namespace lnafim {

/// Observation regimes.
///   TS: samples along one trajectory (temporally correlated).
///   TP: each time point from an independent trajectory.
///   DT: MRE solution plus N(0, sigma_eps2) measurement error.
enum class Regime { TS, TP, DT };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);  // throws InputError

struct ObservationDesign {
  std::string name;
  Regime regime = Regime::TS;
  std::vector<double> times;
  std::vector<int> observed;  // species indices, one projection row each
  double sigma_eps2 = 0.0;
  InitialCondition init = InitialCondition::stationary();

  int num_observed() const { return static_cast<int>(observed.size()); }
  /// M x N 0/1 selection matrix.
  Matrix projection(int num_species) const;
  /// Throws InputError for unknown/duplicate species, bad times, or DT
  /// with sigma_eps2 <= 0.
  void validate(const ReactionNetwork& net) const;
};

/// Stacked observation mean, block covariance and their derivatives with
/// respect to the natural parameters. Derivative vectors are empty when the
/// trajectory was integrated without sensitivities.
struct MomentStack {
  Vector mu;
  Matrix Sigma;
  std::vector<Vector> dmu;
  std::vector<Matrix> dSigma;
  int num_times = 0;
  int num_observed = 0;
  Regime regime = Regime::TS;
  double jitter = 0.0;

  bool has_derivatives() const { return !dmu.empty(); }
  int num_params() const { return static_cast<int>(dmu.size()); }
};

/// Builds mu and Sigma_Q from a trajectory evaluated at the design times.
/// Block (i, j), i < j, is cov(x(t_i), x(t_j)) = P V(t_i) Phi(t_i,t_j)^T P^T
/// for TS and 0 otherwise; diagonal blocks are P V(t_i) P^T (TS, TP) or
/// zero (DT), plus sigma_eps2 * I and `jitter` * I in every regime.
/// Throws NumericalError("assemble_moments", ...) when Sigma has an
/// eigenvalue below -1e-8 * trace.
MomentStack assemble_moments(const LnaTrajectory& traj, const ObservationDesign& design,
                             double jitter = 0.0);

/// Integrates the LNA for `design` and assembles the moments.
MomentStack compute_moments(const ReactionNetwork& net, const Vector& theta,
                            const ObservationDesign& design, const SolverConfig& cfg = {},
                            bool with_sensitivities = true, double jitter = 0.0,
                            int* clamped_rates = nullptr);

/// Multivariate normal density with a cached Cholesky factor.
class MvnDensity {
 public:
  MvnDensity(Vector mu, const Matrix& Sigma);
  double log_pdf(const Vector& y) const;
  const Eigen::LLT<Matrix>& cholesky() const { return llt_; }
  const Vector& mean() const { return mu_; }

 private:
  Vector mu_;
  Eigen::LLT<Matrix> llt_;
  double log_norm_ = 0.0;
};

/// log N(y; mu, Sigma) via Cholesky; NumericalError when Sigma is not PD.
double mvn_loglik(const MomentStack& stack, const Vector& y);

}  // namespace lnafim
