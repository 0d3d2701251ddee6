#include "lnafim/fisher.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <omp.h>

namespace lnafim {

std::string to_string(ParamScale s) { return s == ParamScale::Log ? "log" : "natural"; }

namespace {

void require_derivatives(const MomentStack& stack) {
  if (!stack.has_derivatives())
    throw NumericalError("compute_fim", "moment stack carries no parameter derivatives");
}

bool has_sigma_derivatives(const MomentStack& stack) {
  if (stack.regime == Regime::DT) return false;
  for (const auto& d : stack.dSigma)
    if (!d.isZero(0.0)) return true;
  return false;
}

}  // namespace

namespace kernels {

Matrix fim_serial(const MomentStack& stack) {
  require_derivatives(stack);
  const int L = stack.num_params();
  Eigen::LLT<Matrix> llt(stack.Sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError("compute_fim", "covariance is not positive definite");
  const Matrix inv = llt.solve(Matrix::Identity(stack.Sigma.rows(), stack.Sigma.cols()));
  const bool cov_terms = has_sigma_derivatives(stack);
  Matrix fim(L, L);
  for (int k = 0; k < L; ++k)
    for (int l = 0; l < L; ++l) {
      const auto uk = static_cast<std::size_t>(k), ul = static_cast<std::size_t>(l);
      double v = stack.dmu[uk].dot(inv * stack.dmu[ul]);
      if (cov_terms)
        v += 0.5 * (inv * stack.dSigma[uk] * inv * stack.dSigma[ul]).trace();
      fim(k, l) = v;
    }
  return 0.5 * (fim + fim.transpose());
}

Matrix fim_parallel(const MomentStack& stack) {
  require_derivatives(stack);
  const int L = stack.num_params();
  Eigen::LLT<Matrix> llt(stack.Sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError("compute_fim", "covariance is not positive definite");
  const bool cov_terms = has_sigma_derivatives(stack);
  const auto uL = static_cast<std::size_t>(L);

  std::vector<Vector> u(uL);  // Sigma^-1 dmu_k
  std::vector<Matrix> W(cov_terms ? uL : 0);  // Sigma^-1 dSigma_k
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < L; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    u[uk] = llt.solve(stack.dmu[uk]);
    if (cov_terms) W[uk] = llt.solve(stack.dSigma[uk]);
  }

  // tr(W_k W_l) = sum_ij W_k(i,j) W_l(j,i)
  std::vector<Matrix> Wt(W.size());
  for (std::size_t k = 0; k < W.size(); ++k) Wt[k] = W[k].transpose();
  Matrix fim(L, L);
  const int pairs = L * (L + 1) / 2;
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < pairs; ++p) {
    int k = 0, rem = p;
    while (rem >= L - k) rem -= L - k++;
    const int l = k + rem;
    const auto uk = static_cast<std::size_t>(k), ul = static_cast<std::size_t>(l);
    double v = stack.dmu[uk].dot(u[ul]);
    if (cov_terms) v += 0.5 * W[uk].cwiseProduct(Wt[ul]).sum();
    fim(k, l) = v;
    fim(l, k) = v;
  }
  return fim;
}

}  // namespace kernels

Matrix compute_fim(const MomentStack& stack, ExecPolicy policy) {
  return policy == ExecPolicy::Serial ? kernels::fim_serial(stack) : kernels::fim_parallel(stack);
}

Matrix to_log_scale(const Matrix& fim, const Vector& theta) {
  if (theta.size() != fim.rows()) throw InputError("parameter vector has the wrong length");
  if ((theta.array() <= 0.0).any())
    throw InputError("log scale requires strictly positive parameter values");
  return theta.asDiagonal() * fim * theta.asDiagonal();
}

EigenAnalysis eigen_analysis(const Matrix& fim) {
  const Matrix sym = 0.5 * (fim + fim.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const auto L = sym.rows();
  EigenAnalysis out;
  out.values.resize(L);
  out.vectors.resize(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    // Eigen returns ascending order.
    out.values[i] = es.eigenvalues()[L - 1 - i];
    Vector v = es.eigenvectors().col(L - 1 - i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    out.vectors.row(i) = v.transpose();
  }
  if (L == 0) return out;
  out.min_raw = out.values[L - 1];
  const double scale = std::abs(out.values[0]);
  for (Eigen::Index i = 0; i < L; ++i)
    if (std::abs(out.values[i]) <= 1e-12 * scale) out.values[i] = 0.0;
  return out;
}

SensitivityCoefficients sensitivity_coefficients(const Vector& lambda, const Matrix& C) {
  SensitivityCoefficients out;
  const auto L = C.cols();
  out.S2 = Vector::Zero(L);
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    out.S2 += std::max(lambda[i], 0.0) * C.row(i).transpose().cwiseAbs2();
  const double total = out.S2.sum();
  out.T_defined = total > 0.0;
  out.T = out.T_defined ? Vector(out.S2 / total)
                        : Vector::Constant(L, std::numeric_limits<double>::quiet_NaN());
  return out;
}

int identifiability_rank(const Vector& lambda, double tau) {
  if (lambda.size() == 0 || !(lambda[0] > 0.0)) return 0;
  int count = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda[i] > tau * lambda[0]) ++count;
  return count;
}

CramerRaoBounds cramer_rao(const Matrix& fim, double tau) {
  CramerRaoBounds out;
  const EigenAnalysis ea = eigen_analysis(fim);
  out.rank = identifiability_rank(ea.values, tau);
  if (out.rank < fim.rows()) {
    out.singular = true;
    return out;
  }
  Eigen::LLT<Matrix> llt(0.5 * (fim + fim.transpose()));
  if (llt.info() != Eigen::Success) {
    out.singular = true;
    return out;
  }
  out.bounds = llt.solve(Matrix::Identity(fim.rows(), fim.cols())).diagonal();
  return out;
}

OptimalityScalars optimality_scalars(const Matrix& fim) {
  OptimalityScalars out;
  const auto L = fim.rows();
  const EigenAnalysis ea = eigen_analysis(fim);
  const double lam1 = L > 0 ? ea.values[0] : 0.0;
  const double floor = static_cast<double>(L) * std::numeric_limits<double>::epsilon() * lam1;
  Eigen::LLT<Matrix> llt(0.5 * (fim + fim.transpose()));
  if (L == 0 || !(lam1 > 0.0) || !(ea.min_raw > floor) || llt.info() != Eigen::Success) {
    out.singular = true;
    out.log_det = -std::numeric_limits<double>::infinity();
    out.trace_inverse = std::numeric_limits<double>::infinity();
    return out;
  }
  const Matrix& Lm = llt.matrixLLT();
  for (Eigen::Index i = 0; i < L; ++i) out.log_det += 2.0 * std::log(Lm(i, i));
  out.trace_inverse = llt.solve(Matrix::Identity(L, L)).trace();
  return out;
}

NeutralEllipse neutral_ellipsoid(const Matrix& fim, const Vector& center, double eps, int j, int k,
                                 CrossSection mode, int num_points) {
  const auto L = static_cast<int>(fim.rows());
  if (!(eps > 0.0)) throw InputError("neutral ellipsoid requires eps > 0");
  if (j < 0 || k < 0 || j >= L || k >= L || j == k)
    throw InputError("neutral ellipsoid needs two distinct parameter indices");
  if (center.size() != L) throw InputError("centre has the wrong length");
  if (num_points < 3) throw InputError("ellipse needs at least 3 points");

  NeutralEllipse out;
  out.j = j;
  out.k = k;
  out.center = {center[j], center[k]};

  const Matrix F = 0.5 * (fim + fim.transpose());
  Matrix Q(2, 2);
  Q << F(j, j), F(j, k), F(k, j), F(k, k);
  if (mode == CrossSection::Profile && L > 2) {
    std::vector<int> rest;
    for (int i = 0; i < L; ++i)
      if (i != j && i != k) rest.push_back(i);
    const auto nr = static_cast<Eigen::Index>(rest.size());
    Matrix Frr(nr, nr), Fra(nr, 2);
    for (Eigen::Index a = 0; a < nr; ++a) {
      Fra(a, 0) = F(rest[static_cast<std::size_t>(a)], j);
      Fra(a, 1) = F(rest[static_cast<std::size_t>(a)], k);
      for (Eigen::Index b = 0; b < nr; ++b)
        Frr(a, b) = F(rest[static_cast<std::size_t>(a)], rest[static_cast<std::size_t>(b)]);
    }
    // Pseudo-inverse of the nuisance block: directions it cannot resolve
    // are free and drop out of the profile.
    Eigen::SelfAdjointEigenSolver<Matrix> es(Frr);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    Vector inv_vals = es.eigenvalues();
    for (Eigen::Index i = 0; i < inv_vals.size(); ++i)
      inv_vals[i] = inv_vals[i] > 1e-12 * top ? 1.0 / inv_vals[i] : 0.0;
    const Matrix pinv = es.eigenvectors() * inv_vals.asDiagonal() * es.eigenvectors().transpose();
    Q -= Fra.transpose() * pinv * Fra;
    Q = 0.5 * (Q + Q.transpose()).eval();
  }
  out.form = Q;

  // Closed-form 2x2 eigenstructure; invariant under Q -> cQ.
  const double a = Q(0, 0), b = Q(0, 1), c = Q(1, 1);
  const double phi = 0.5 * std::atan2(2.0 * b, a - c);
  const double cs = std::cos(phi), sn = std::sin(phi);
  const double mu1 = a * cs * cs + 2.0 * b * sn * cs + c * sn * sn;
  const double mu2 = a * sn * sn - 2.0 * b * sn * cs + c * cs * cs;
  out.angle = phi;
  const double scale = std::max({std::abs(mu1), std::abs(mu2), 0.0});
  const double tol = 1e-12 * std::max(scale, std::abs(a) + std::abs(c));
  if (!(mu1 > tol) || !(mu2 > tol)) {
    out.bounded = false;
    const bool first = !(mu1 > tol);
    out.unbounded_note = "cross-section is unbounded along direction (" +
                         std::to_string(first ? cs : -sn) + ", " + std::to_string(first ? sn : cs) +
                         "): zero curvature";
    out.semi_axes = {first ? std::numeric_limits<double>::infinity() : std::sqrt(eps / mu1),
                     first && mu2 > tol ? std::sqrt(eps / mu2)
                                        : std::numeric_limits<double>::infinity()};
  } else {
    const double r1 = std::sqrt(eps) / std::sqrt(mu1);
    const double r2 = std::sqrt(eps) / std::sqrt(mu2);
    out.semi_axes = {r1, r2};
    out.points.reserve(static_cast<std::size_t>(num_points));
    for (int m = 0; m < num_points; ++m) {
      const double t = 2.0 * std::numbers::pi * m / num_points;
      const double p1 = r1 * std::cos(t), p2 = r2 * std::sin(t);
      out.points.push_back({out.center[0] + cs * p1 - sn * p2, out.center[1] + sn * p1 + cs * p2});
    }
  }

  const EigenAnalysis ea = eigen_analysis(F);
  out.radii.resize(L);
  for (int i = 0; i < L; ++i)
    out.radii[i] = ea.values[i] > 0.0 ? std::sqrt(eps) / std::sqrt(ea.values[i])
                                      : std::numeric_limits<double>::infinity();
  return out;
}

FimReport make_fim_report(const Matrix& fim, std::vector<std::string> names, Vector theta,
                          ParamScale scale, double rank_tol) {
  FimReport r;
  r.param_names = std::move(names);
  r.scale = scale;
  r.theta = std::move(theta);
  r.fim = fim;
  r.rank_tol = rank_tol;
  r.eig = eigen_analysis(fim);
  r.sens = sensitivity_coefficients(r.eig.values, r.eig.vectors);
  r.rank = identifiability_rank(r.eig.values, rank_tol);
  r.cr = cramer_rao(fim, rank_tol);
  r.opt = optimality_scalars(fim);
  if (r.eig.values.size() > 0 && r.eig.min_raw < -1e-9 * std::abs(r.eig.values[0]))
    r.warnings.push_back("FIM has a negative eigenvalue beyond round-off (" +
                         std::to_string(r.eig.min_raw) + ")");
  if (r.cr.singular)
    r.warnings.push_back("FIM is singular (rank " + std::to_string(r.rank) + " of " +
                         std::to_string(fim.rows()) + "); Cramer-Rao bounds unavailable");
  if (!r.sens.T_defined) r.warnings.push_back("FIM is zero; normalized sensitivities undefined");
  return r;
}

}  // namespace lnafim
