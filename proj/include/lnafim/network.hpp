#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lnafim/expr.hpp"

namespace lnafim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One reaction channel: integer-weighted reactant and product species
/// (index, multiplicity) and its transition rate f_j(x, theta, t).
struct Reaction {
  std::vector<std::pair<int, int>> reactants;
  std::vector<std::pair<int, int>> products;
  Expr rate;
};

class Kinetics;

/// A chemical reaction network: N species, L parameters, R reactions.
///
/// Immutable after construction. The constructor validates the
/// invariants (unique names, in-range symbol references, no all-zero
/// stoichiometry column) and precompiles every first and second partial
/// derivative of the rates that the LNA equations need.
class ReactionNetwork {
 public:
  ReactionNetwork(std::vector<std::string> species, std::vector<std::string> params,
                  std::vector<Reaction> reactions);

  int num_species() const { return static_cast<int>(species_.size()); }
  int num_params() const { return static_cast<int>(params_.size()); }
  int num_reactions() const { return static_cast<int>(reactions_.size()); }

  const std::vector<std::string>& species() const { return species_; }
  const std::vector<std::string>& params() const { return params_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const Expr& rate(int j) const { return reactions_[static_cast<std::size_t>(j)].rate; }

  /// N x R stoichiometry matrix S (products minus reactants).
  const Eigen::MatrixXi& stoichiometry() const { return stoich_; }
  /// S as doubles, for the linear algebra.
  const Matrix& stoichiometry_real() const { return stoich_real_; }

  /// -1 when absent.
  int species_index(std::string_view name) const;
  int param_index(std::string_view name) const;

  const Kinetics& kinetics() const { return *kinetics_; }

  /// Model source in the DSL; parse_model(to_dsl()) == *this.
  std::string to_dsl() const;

  friend bool operator==(const ReactionNetwork& a, const ReactionNetwork& b);

 private:
  std::vector<std::string> species_;
  std::vector<std::string> params_;
  std::vector<Reaction> reactions_;
  Eigen::MatrixXi stoich_;
  Matrix stoich_real_;
  std::shared_ptr<const Kinetics> kinetics_;
};

/// Compiled rate laws and their partial derivatives.
///
/// Indexing: rate j, species k/m, parameter l. Second partials with respect
/// to species are stored for k <= m only.
class Kinetics {
 public:
  explicit Kinetics(const ReactionNetwork& net);

  int N() const { return n_; }
  int R() const { return r_; }
  int L() const { return l_; }

  /// F (length R).
  void rates(const double* x, const double* theta, double t, Vector& out) const;
  /// dF/dx (R x N).
  void rate_jacobian_x(const double* x, const double* theta, double t, Matrix& out) const;
  /// dF/dtheta (R x L).
  void rate_jacobian_theta(const double* x, const double* theta, double t, Matrix& out) const;
  /// out[m](j, k) = d2 f_j / dx_k dx_m, each R x N.
  void rate_hessian_xx(const double* x, const double* theta, double t,
                       std::vector<Matrix>& out) const;
  /// out[l](j, k) = d2 f_j / dx_k dtheta_l, each R x N.
  void rate_hessian_xtheta(const double* x, const double* theta, double t,
                           std::vector<Matrix>& out) const;

  /// Symbolic first partials, exposed for tests and printing.
  const Expr& d_rate_dx(int j, int k) const { return dfdx_sym_[idx(j, k, n_)]; }
  const Expr& d_rate_dtheta(int j, int l) const { return dfdth_sym_[idx(j, l, l_)]; }

 private:
  static std::size_t idx(int a, int b, int nb) {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b);
  }
  int n_, r_, l_;
  std::vector<CompiledExpr> f_;
  std::vector<Expr> dfdx_sym_, dfdth_sym_;
  std::vector<CompiledExpr> dfdx_, dfdth_;
  std::vector<CompiledExpr> d2xx_;  // [(j*N + k)*N + m], k <= m populated
  std::vector<CompiledExpr> d2xth_;  // [(j*N + k)*L + l]
};

/// Rates clamped by diffusion_D: values in [-1e-9, 0) are treated as 0.
inline constexpr double kRateClampTolerance = 1e-9;

/// F(x, theta, t): the length-R transition-rate vector.
Vector drift_F(const ReactionNetwork& net, const Vector& x, const Vector& theta, double t = 0.0);

/// A_ik = sum_j s_ij df_j/dphi_k.
Matrix jacobian_A(const ReactionNetwork& net, const Vector& phi, const Vector& theta,
                  double t = 0.0);

/// E E^T = S diag(F) S^T. Rates in [-1e-9, 0) are clamped to 0 and counted
/// in `clamped` (when given); a rate below -1e-9 throws NumericalError.
Matrix diffusion_D(const ReactionNetwork& net, const Vector& phi, const Vector& theta,
                   double t = 0.0, int* clamped = nullptr);

/// S diag(rates) S^T with the clamp rule above applied to `rates`.
Matrix diffusion_from_rates(const Matrix& stoich, const Vector& rates, int* clamped = nullptr);

}  // namespace lnafim
