#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lnafim/integrator.hpp"
#include "lnafim/network.hpp"

namespace lnafim {

/// Initial condition at t = 0.
///
/// Explicit: phi0 and V0 are given numbers, independent of theta.
/// Stationary: phi0 = mean_scale * phi*(theta), V0 = var_scale * V*(theta),
/// so the initial condition (and its theta-derivative) follows the
/// stationary state. mean_scale = var_scale = 1 is "start at steady state".
struct InitialCondition {
  enum class Mode { Explicit, Stationary };

  Mode mode = Mode::Stationary;
  Vector phi0;
  Matrix V0;
  double mean_scale = 1.0;
  double var_scale = 1.0;
  std::optional<Vector> guess;  // Newton starting point for Stationary

  static InitialCondition explicit_state(Vector phi0, Matrix V0);
  static InitialCondition stationary(double mean_scale = 1.0, double var_scale = 1.0);
};

/// Stationary LNA moments and their implicit theta-derivatives.
struct StationaryState {
  Vector phi;
  Matrix V;
  bool has_sensitivities = false;
  std::vector<Vector> dphi;  // [l]
  std::vector<Matrix> dV;    // [l]
  int newton_iterations = 0;
  double residual = 0.0;
};

/// LNA solution sampled on an observation grid.
///
/// Phi[i] is the propagator over [t_i, t_{i+1}] (size n-1). Sensitivity
/// containers are indexed [time][parameter] and empty unless requested.
struct LnaTrajectory {
  std::vector<double> times;
  std::vector<Vector> phi;
  std::vector<Matrix> V;
  std::vector<Matrix> Phi;

  bool has_sensitivities = false;
  std::vector<std::vector<Vector>> dphi;
  std::vector<std::vector<Matrix>> dV;
  std::vector<std::vector<Matrix>> dPhi;

  int clamped_rates = 0;
  IntegratorStats stats;

  std::size_t size() const { return times.size(); }
};

/// Packed upper triangle of a symmetric N x N matrix, row by row.
int packed_size(int n);
void pack_symmetric(const Matrix& m, double* out);
Matrix unpack_symmetric(const double* packed, int n);

/// The augmented LNA right-hand side.
///
/// State layout: [phi (N) | V packed (N(N+1)/2) | Phi (N*N, column-major)]
/// followed, when sensitivities are on, by L copies of the same block
/// holding d/dtheta_l of each part.
class LnaSystem {
 public:
  LnaSystem(const ReactionNetwork& net, Vector theta, bool with_sensitivities);

  int block_size() const { return block_; }
  int state_size() const { return block_ * (sens_ ? 1 + net_->num_params() : 1); }
  bool with_sensitivities() const { return sens_; }
  int clamped_rates() const { return clamped_; }

  void operator()(double t, const Vector& y, Vector& dydt);

  // Offsets inside a block.
  int off_phi() const { return 0; }
  int off_V() const { return n_; }
  int off_Phi() const { return n_ + packed_size(n_); }

 private:
  const ReactionNetwork* net_;
  Vector theta_;
  bool sens_;
  int n_, block_;
  int clamped_ = 0;
  Vector F_;
  Matrix dFdx_, dFdth_, A_, V_, Phi_;
  std::vector<Matrix> hxx_, hxth_;
};

/// Macroscopic rate equation dphi/dt = S F(phi, theta, t) from an explicit
/// phi0 at t = 0, sampled at `times` (non-decreasing, >= 0).
std::vector<Vector> integrate_mre(const ReactionNetwork& net, const Vector& theta,
                                  const Vector& phi0, std::span<const double> times,
                                  const SolverConfig& cfg = {});

/// Mean, variance, interval propagators and (optionally) all their
/// theta-sensitivities from one augmented ODE solve. Times must be
/// non-decreasing and >= 0; a zero-length interval yields Phi = I exactly.
LnaTrajectory integrate_lna(const ReactionNetwork& net, const Vector& theta,
                            const InitialCondition& ic, std::span<const double> times,
                            const SolverConfig& cfg = {}, bool with_sensitivities = true);

/// Fixed point of the MRE by damped Newton, stationary variance from the
/// algebraic Lyapunov equation, and sensitivities by implicit
/// differentiation. Throws NumericalError("stationary_state", "no stable
/// stationary LNA ...") when the Jacobian is not Hurwitz.
StationaryState stationary_state(const ReactionNetwork& net, const Vector& theta,
                                 const std::optional<Vector>& guess = std::nullopt,
                                 const SolverConfig& cfg = {}, bool with_sensitivities = true);

/// Solves A X + X A^T + Q = 0 for symmetric X via the N(N+1)/2 packed
/// unknowns. Throws NumericalError when the linear system is singular.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Propagator over [t_i, t_j] from the per-interval ones:
/// Phi_{j-1} * ... * Phi_i. `props` holds Phi_i ... Phi_{j-1}.
Matrix compose_propagators(std::span<const Matrix> props);

/// Same, with theta-derivatives by the product rule. `dprops[m][l]` is the
/// derivative of props[m] with respect to theta_l.
std::pair<Matrix, std::vector<Matrix>> compose_propagators(
    std::span<const Matrix> props, std::span<const std::vector<Matrix>> dprops);

}  // namespace lnafim
