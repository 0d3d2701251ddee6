#include "lnafim/observation.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace lnafim {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::TS: return "TS";
    case Regime::TP: return "TP";
    case Regime::DT: return "DT";
  }
  return "?";
}

Regime regime_from_string(const std::string& s) {
  if (s == "TS") return Regime::TS;
  if (s == "TP") return Regime::TP;
  if (s == "DT") return Regime::DT;
  throw InputError("unknown regime '" + s + "' (expected TS, TP or DT)");
}

Matrix ObservationDesign::projection(int num_species) const {
  Matrix P = Matrix::Zero(num_observed(), num_species);
  for (int r = 0; r < num_observed(); ++r) P(r, observed[static_cast<std::size_t>(r)]) = 1.0;
  return P;
}

void ObservationDesign::validate(const ReactionNetwork& net) const {
  if (times.empty()) throw InputError("design '" + name + "': no observation times");
  if (!(times[0] >= 0.0)) throw InputError("design '" + name + "': times must be >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw InputError("design '" + name + "': times must be strictly increasing");
  if (observed.empty()) throw InputError("design '" + name + "': no observed species");
  std::set<int> seen;
  for (int s : observed) {
    if (s < 0 || s >= net.num_species())
      throw InputError("design '" + name + "': observed species index out of range");
    if (!seen.insert(s).second)
      throw InputError("design '" + name + "': species '" + net.species()[static_cast<std::size_t>(s)] +
                       "' observed twice");
  }
  if (!(sigma_eps2 >= 0.0)) throw InputError("design '" + name + "': sigma_eps2 must be >= 0");
  if (regime == Regime::DT && !(sigma_eps2 > 0.0))
    throw InputError("design '" + name + "': DT regime requires sigma_eps2 > 0");
}

MomentStack assemble_moments(const LnaTrajectory& traj, const ObservationDesign& design,
                             double jitter) {
  const int n = static_cast<int>(design.times.size());
  if (static_cast<int>(traj.size()) != n)
    throw NumericalError("assemble_moments", "trajectory and design '" + design.name +
                                                 "' have different numbers of time points");
  for (int i = 0; i < n; ++i)
    if (traj.times[static_cast<std::size_t>(i)] != design.times[static_cast<std::size_t>(i)])
      throw NumericalError("assemble_moments",
                           "trajectory times do not match design '" + design.name + "'");

  const int N = static_cast<int>(traj.phi.front().size());
  const int M = design.num_observed();
  const Matrix P = design.projection(N);
  const bool sens = traj.has_sensitivities;
  const int L = sens ? static_cast<int>(traj.dphi.front().size()) : 0;
  const auto uL = static_cast<std::size_t>(L);
  const bool stochastic = design.regime != Regime::DT;

  MomentStack out;
  out.num_times = n;
  out.num_observed = M;
  out.regime = design.regime;
  out.jitter = jitter;
  out.mu.resize(n * M);
  out.Sigma = Matrix::Zero(n * M, n * M);
  if (sens) {
    out.dmu.assign(uL, Vector::Zero(n * M));
    out.dSigma.assign(uL, Matrix::Zero(n * M, n * M));
  }

  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    out.mu.segment(i * M, M) = P * traj.phi[ui];
    for (std::size_t l = 0; l < uL; ++l) out.dmu[l].segment(i * M, M) = P * traj.dphi[ui][l];
    if (stochastic) {
      out.Sigma.block(i * M, i * M, M, M) = P * traj.V[ui] * P.transpose();
      for (std::size_t l = 0; l < uL; ++l)
        out.dSigma[l].block(i * M, i * M, M, M) = P * traj.dV[ui][l] * P.transpose();
    }
    out.Sigma.block(i * M, i * M, M, M).diagonal().array() += design.sigma_eps2 + jitter;
  }

  if (design.regime == Regime::TS) {
    for (int i = 0; i + 1 < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      // Running product Phi(t_i, t_j) = Phi_{j-1} ... Phi_i and its derivatives.
      Matrix prop = traj.Phi[ui];
      std::vector<Matrix> dprop;
      if (sens) dprop = traj.dPhi[ui];
      for (int j = i + 1; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (j > i + 1) {
          const Matrix& step = traj.Phi[uj - 1];
          for (std::size_t l = 0; l < uL; ++l)
            dprop[l] = (traj.dPhi[uj - 1][l] * prop + step * dprop[l]).eval();
          prop = (step * prop).eval();
        }
        const Matrix block = P * traj.V[ui] * prop.transpose() * P.transpose();
        out.Sigma.block(i * M, j * M, M, M) = block;
        out.Sigma.block(j * M, i * M, M, M) = block.transpose();
        for (std::size_t l = 0; l < uL; ++l) {
          const Matrix db = P *
                            (traj.dV[ui][l] * prop.transpose() + traj.V[ui] * dprop[l].transpose()) *
                            P.transpose();
          out.dSigma[l].block(i * M, j * M, M, M) = db;
          out.dSigma[l].block(j * M, i * M, M, M) = db.transpose();
        }
      }
    }
  }

  const double trace = out.Sigma.trace();
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(out.Sigma, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (min_eig < -1e-8 * std::abs(trace)) {
    std::ostringstream msg;
    msg << "covariance for design '" << design.name
        << "' is not positive definite (smallest eigenvalue " << min_eig << ")";
    throw NumericalError("assemble_moments", msg.str());
  }
  return out;
}

MomentStack compute_moments(const ReactionNetwork& net, const Vector& theta,
                            const ObservationDesign& design, const SolverConfig& cfg,
                            bool with_sensitivities, double jitter, int* clamped_rates) {
  design.validate(net);
  const LnaTrajectory traj =
      integrate_lna(net, theta, design.init, design.times, cfg, with_sensitivities);
  if (clamped_rates != nullptr) *clamped_rates += traj.clamped_rates;
  return assemble_moments(traj, design, jitter);
}

MvnDensity::MvnDensity(Vector mu, const Matrix& Sigma) : mu_(std::move(mu)), llt_(Sigma) {
  if (llt_.info() != Eigen::Success)
    throw NumericalError("mvn_loglik", "covariance is not positive definite");
  const Matrix& Lm = llt_.matrixLLT();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < Lm.rows(); ++i) logdet += 2.0 * std::log(Lm(i, i));
  log_norm_ = -0.5 * (static_cast<double>(mu_.size()) * std::log(2.0 * std::numbers::pi) + logdet);
}

double MvnDensity::log_pdf(const Vector& y) const {
  if (y.size() != mu_.size()) throw InputError("observation vector has the wrong length");
  const Vector z = llt_.matrixL().solve(y - mu_);
  return log_norm_ - 0.5 * z.squaredNorm();
}

double mvn_loglik(const MomentStack& stack, const Vector& y) {
  return MvnDensity(stack.mu, stack.Sigma).log_pdf(y);
}

}  // namespace lnafim
