#pragma once

#include <cmath>
#include <random>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "lnafim/io.hpp"
#include "lnafim/parser.hpp"

namespace lnafim::test {

inline std::string model_path(const std::string& file) {
  return std::string(LNAFIM_MODELS_DIR) + "/" + file;
}

inline ReactionNetwork load_model(const std::string& name) {
  return parse_model(io::read_file(model_path(name + ".lna")));
}

inline Vector load_params(const ReactionNetwork& net, const std::string& name) {
  return io::parse_params(io::read_file(model_path(name + "_params.json")), net);
}

inline ObservationDesign load_design(const ReactionNetwork& net, const std::string& file) {
  return io::parse_design(io::read_file(model_path(file)), net, file);
}

inline const char* kGeneText = R"(species r p
params k_r k_p gamma_r gamma_p
reaction 0 -> r @ k_r
reaction r -> r + p @ k_p * r
reaction r -> 0 @ gamma_r * r
reaction p -> 0 @ gamma_p * p
)";

inline const char* kBirthDeathText = R"(species x
params k gamma
reaction 0 -> x @ k
reaction x -> 0 @ gamma * x
)";

inline const char* kDecayText = R"(species x
params gamma
reaction x -> 0 @ gamma * x
)";

/// (10, 4, 1, 0.7): the reference point used in hand calculations.
inline Vector gene_reference_theta() {
  Vector th(4);
  th << 10.0, 4.0, 1.0, 0.7;
  return th;
}

inline ObservationDesign equidistant(Regime r, int n, double delta, std::vector<int> observed,
                                     double sigma_eps2 = 0.0,
                                     InitialCondition ic = InitialCondition::stationary()) {
  ObservationDesign d;
  d.name = to_string(r);
  d.regime = r;
  for (int i = 1; i <= n; ++i) d.times.push_back(i * delta);
  d.observed = std::move(observed);
  d.sigma_eps2 = sigma_eps2;
  d.init = std::move(ic);
  return d;
}

/// theta scaled by independent log-uniform factors in [1/spread, spread].
inline Vector random_point(const Vector& theta, double spread, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-std::log(spread), std::log(spread));
  Vector out = theta;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] *= std::exp(u(rng));
  return out;
}

inline double max_rel_diff(const Matrix& a, const Matrix& b, double floor = 0.0) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double d = std::max({std::abs(a(i, j)), std::abs(b(i, j)), floor});
      if (d > 0.0) worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / d);
    }
  return worst;
}

/// Lyapunov oracle: A X + X A^T + Q = 0 through the full N^2 Kronecker system.
inline Matrix lyapunov_kron(const Matrix& A, const Matrix& Q) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  // Column-major vec: vec(A X) = (I kron A) vec X, vec(X A^T) = (A kron I) vec X.
  Matrix K2 = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) K2.block(i * n, i * n, n, n) = A;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K2.block(i * n, j * n, n, n) += A(i, j) * I;
  const Vector q = Eigen::Map<const Vector>(Q.data(), n * n);
  const Vector x = K2.fullPivLu().solve(-q);
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

}  // namespace lnafim::test
