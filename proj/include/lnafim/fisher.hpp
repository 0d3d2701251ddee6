#pragma once

#include <array>
#include <string>
#include <vector>

#include "lnafim/observation.hpp"

namespace lnafim {

enum class ParamScale { Natural, Log };
enum class ExecPolicy { Serial, Parallel };

std::string to_string(ParamScale s);

// -- Fisher information of a multivariate normal ----------------------------
//
//   I_kl = dmu_k^T Sigma^-1 dmu_l + 1/2 tr(Sigma^-1 dSigma_k Sigma^-1 dSigma_l)
//
// The derivatives in the stack are with respect to natural parameters.

namespace kernels {
/// Reference implementation: explicit inverse and full matrix products.
Matrix fim_serial(const MomentStack& stack);
/// OpenMP implementation: Cholesky solves, W_k = Sigma^-1 dSigma_k computed
/// in parallel over k, traces as element-wise sums in parallel over (k, l).
Matrix fim_parallel(const MomentStack& stack);
}  // namespace kernels

/// Throws NumericalError("compute_fim", ...) when Sigma is not PD or the
/// stack carries no derivatives.
Matrix compute_fim(const MomentStack& stack, ExecPolicy policy = ExecPolicy::Parallel);

/// I_log = J I J with J = diag(theta): information about log-parameters.
Matrix to_log_scale(const Matrix& fim, const Vector& theta);

struct EigenAnalysis {
  Vector values;   // descending
  Matrix vectors;  // row i = direction of values[i]
  double min_raw = 0.0;  // smallest eigenvalue before clamping
};

/// Symmetric eigendecomposition. Eigenvalues within 1e-12 * lambda_1 of
/// zero are set to 0; each direction's largest-magnitude entry is positive.
EigenAnalysis eigen_analysis(const Matrix& fim);

struct SensitivityCoefficients {
  Vector S2;  // S_j^2 = sum_i lambda_i C_ij^2
  Vector T;   // S_j^2 / sum_i S_i^2; NaN when undefined
  bool T_defined = false;
};

SensitivityCoefficients sensitivity_coefficients(const Vector& lambda, const Matrix& C);

inline constexpr double kDefaultRankTolerance = 1e-8;

/// Number of eigenvalues above tau * lambda_1 (0 when lambda_1 <= 0).
int identifiability_rank(const Vector& lambda, double tau = kDefaultRankTolerance);

struct CramerRaoBounds {
  bool singular = false;
  int rank = 0;
  Vector bounds;  // diag(fim^-1), empty when singular
};

CramerRaoBounds cramer_rao(const Matrix& fim, double tau = kDefaultRankTolerance);

/// D- and A-optimality scalars. A matrix is treated as singular when its
/// smallest eigenvalue is <= L * eps * lambda_1 (numerical rank deficiency);
/// then log_det = -inf and trace_inverse = +inf.
struct OptimalityScalars {
  double log_det = 0.0;
  double trace_inverse = 0.0;
  bool singular = false;
};

OptimalityScalars optimality_scalars(const Matrix& fim);

enum class CrossSection { Profile, Slice };

struct NeutralEllipse {
  int j = 0, k = 0;
  std::array<double, 2> center{};
  Matrix form;  // 2x2 quadratic form of the cross-section
  bool bounded = true;
  std::array<double, 2> semi_axes{};  // along the form's principal directions
  double angle = 0.0;                 // of the first principal direction
  std::vector<std::array<double, 2>> points;
  Vector radii;  // full-dimensional sqrt(eps / lambda_i); +inf for lambda_i = 0
  std::string unbounded_note;
};

/// (j, k) cross-section of {x : (x - center)^T F (x - center) < eps}.
/// Profile uses the Schur complement of F on {j, k}; Slice uses the 2x2
/// submatrix (other coordinates held at the centre).
NeutralEllipse neutral_ellipsoid(const Matrix& fim, const Vector& center, double eps, int j,
                                 int k, CrossSection mode = CrossSection::Profile,
                                 int num_points = 256);

/// Everything derived from one FIM.
struct FimReport {
  std::vector<std::string> param_names;
  ParamScale scale = ParamScale::Log;
  Vector theta;
  Matrix fim;
  EigenAnalysis eig;
  SensitivityCoefficients sens;
  int rank = 0;
  double rank_tol = kDefaultRankTolerance;
  CramerRaoBounds cr;
  OptimalityScalars opt;
  std::vector<std::string> warnings;
};

FimReport make_fim_report(const Matrix& fim, std::vector<std::string> names, Vector theta,
                          ParamScale scale, double rank_tol = kDefaultRankTolerance);

}  // namespace lnafim
