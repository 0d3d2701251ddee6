#include "lnafim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lnafim {

SolverConfig oracle_solver_config(const SolverConfig& base) {
  SolverConfig cfg = base;
  cfg.rtol = std::min(base.rtol, 1e-11);
  cfg.atol = std::min(base.atol, 1e-13);
  cfg.max_steps = std::max(base.max_steps, 2000000L);
  return cfg;
}

namespace {

Vector perturbed(const Vector& theta, int k, double step, ParamScale scale, int sign) {
  Vector out = theta;
  if (scale == ParamScale::Log) out[k] = theta[k] * std::exp(sign * step);
  else out[k] = theta[k] * (1.0 + sign * step);
  return out;
}

// d(theta_k) in the coordinates the derivative is taken in.
double coordinate_step(const Vector& theta, int k, double step, ParamScale scale) {
  return scale == ParamScale::Log ? step : step * theta[k];
}

MomentStack moments_at(const ReactionNetwork& net, const Vector& theta,
                       const ObservationDesign& design, const SolverConfig& cfg) {
  return compute_moments(net, theta, design, cfg, false);
}

}  // namespace

FdFim fd_fim(const ReactionNetwork& net, const Vector& theta, const ObservationDesign& design,
             double step, ParamScale scale, const SolverConfig& cfg) {
  if (!(step > 0.0)) throw InputError("finite-difference step must be > 0");
  const int L = net.num_params();
  const MomentStack centre = moments_at(net, theta, design, cfg);
  const bool dt = design.regime == Regime::DT;

  std::vector<Vector> dmu(static_cast<std::size_t>(L));
  std::vector<Matrix> dSigma(static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) {
    const MomentStack p = moments_at(net, perturbed(theta, k, step, scale, +1), design, cfg);
    const MomentStack m = moments_at(net, perturbed(theta, k, step, scale, -1), design, cfg);
    const double h2 = 2.0 * coordinate_step(theta, k, step, scale);
    dmu[static_cast<std::size_t>(k)] = (p.mu - m.mu) / h2;
    dSigma[static_cast<std::size_t>(k)] = (p.Sigma - m.Sigma) / h2;
  }

  const Eigen::PartialPivLU<Matrix> lu(centre.Sigma);
  const Matrix inv = lu.inverse();
  Matrix I(L, L);
  for (int k = 0; k < L; ++k)
    for (int l = 0; l < L; ++l) {
      const auto uk = static_cast<std::size_t>(k), ul = static_cast<std::size_t>(l);
      double v = dmu[uk].transpose() * inv * dmu[ul];
      if (!dt) v += 0.5 * (inv * dSigma[uk] * inv * dSigma[ul]).trace();
      I(k, l) = v;
    }
  FdFim out;
  out.asymmetry = (I - I.transpose()).cwiseAbs().maxCoeff();
  out.fim = 0.5 * (I + I.transpose());
  return out;
}

ScoreCheck score_check(const MomentStack& truth, std::span<const MomentStack> plus,
                       std::span<const MomentStack> minus, double step, int draws,
                       std::uint64_t seed) {
  if (draws < 1) throw InputError("empty ensemble");
  if (plus.size() != minus.size()) throw InputError("score_check: perturbation count mismatch");
  const auto L = static_cast<int>(plus.size());
  const auto dim = truth.mu.size();

  const MvnDensity draw_from(truth.mu, truth.Sigma);
  std::vector<MvnDensity> dp, dm;
  for (int k = 0; k < L; ++k) {
    dp.emplace_back(plus[static_cast<std::size_t>(k)].mu, plus[static_cast<std::size_t>(k)].Sigma);
    dm.emplace_back(minus[static_cast<std::size_t>(k)].mu, minus[static_cast<std::size_t>(k)].Sigma);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix scores(draws, L);
  Vector z(dim);
  for (int d = 0; d < draws; ++d) {
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = normal(rng);
    const Vector y = truth.mu + draw_from.cholesky().matrixL() * z;
    for (int k = 0; k < L; ++k)
      scores(d, k) = (dp[static_cast<std::size_t>(k)].log_pdf(y) -
                      dm[static_cast<std::size_t>(k)].log_pdf(y)) /
                     (2.0 * step);
  }

  ScoreCheck out;
  out.draws = draws;
  const double n = draws;
  out.mean = scores.colwise().mean().transpose();
  const Matrix centred = scores.rowwise() - out.mean.transpose();
  out.mean_se = (centred.colwise().squaredNorm().transpose() / (n - 1.0) / n).cwiseSqrt();
  out.cov.resize(L, L);
  out.cov_se.resize(L, L);
  for (int k = 0; k < L; ++k)
    for (int l = 0; l < L; ++l) {
      const Vector prod = centred.col(k).cwiseProduct(centred.col(l));
      const double m = prod.mean();
      const double var = (prod.array() - m).square().sum() / (n - 1.0);
      out.cov(k, l) = m * n / (n - 1.0);
      out.cov_se(k, l) = std::sqrt(var / n);
    }
  return out;
}

ScoreCheck score_check(const ReactionNetwork& net, const Vector& theta,
                       const ObservationDesign& design, int draws, std::uint64_t seed, double step,
                       ParamScale scale, const SolverConfig& cfg) {
  if (draws < 1) throw InputError("empty ensemble");
  const int L = net.num_params();
  const MomentStack truth = moments_at(net, theta, design, cfg);
  std::vector<MomentStack> plus, minus;
  std::vector<double> h(static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) {
    plus.push_back(moments_at(net, perturbed(theta, k, step, scale, +1), design, cfg));
    minus.push_back(moments_at(net, perturbed(theta, k, step, scale, -1), design, cfg));
  }
  if (scale == ParamScale::Natural) {
    // Per-coordinate steps differ; rescale each column afterwards.
    ScoreCheck sc = score_check(truth, plus, minus, 1.0, draws, seed);
    for (int k = 0; k < L; ++k) {
      const double hk = coordinate_step(theta, k, step, scale);
      sc.mean[k] /= hk;
      sc.mean_se[k] /= hk;
      sc.cov.row(k) /= hk;
      sc.cov.col(k) /= hk;
      sc.cov_se.row(k) /= hk;
      sc.cov_se.col(k) /= hk;
    }
    return sc;
  }
  return score_check(truth, plus, minus, step, draws, seed);
}

SsaStationaryCheck ssa_stationary_check(const ReactionNetwork& net, const Vector& theta,
                                        std::vector<double> lags, int trajectories,
                                        std::uint64_t seed, double sigmas, ExecPolicy policy) {
  std::sort(lags.begin(), lags.end());
  for (double l : lags)
    if (!(l > 0.0)) throw InputError("lags must be > 0");
  if (std::adjacent_find(lags.begin(), lags.end()) != lags.end())
    throw InputError("lags must be distinct");
  const int N = net.num_species();
  const StationaryState ss = stationary_state(net, theta, std::nullopt, {}, false);
  const Matrix A = jacobian_A(net, ss.phi, theta);
  const Eigen::EigenSolver<Matrix> es(A, false);
  double slowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < A.rows(); ++i) slowest = std::min(slowest, -es.eigenvalues()[i].real());

  SsaStationaryCheck out;
  out.trajectories = trajectories;
  out.lags = lags;
  out.burn_in = 10.0 / slowest;

  // LNA predictions: lag covariances from the stationary propagator.
  std::vector<double> lna_times{0.0};
  lna_times.insert(lna_times.end(), lags.begin(), lags.end());
  const LnaTrajectory traj = integrate_lna(net, theta, InitialCondition::stationary(), lna_times, {}, false);
  std::vector<Matrix> lag_cov;
  for (std::size_t a = 0; a < lags.size(); ++a) {
    const Matrix Phi = compose_propagators(std::span<const Matrix>(traj.Phi.data(), a + 1));
    lag_cov.push_back(ss.V * Phi.transpose());
  }

  std::vector<long long> x0(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) x0[static_cast<std::size_t>(i)] = std::llround(std::max(0.0, ss.phi[i]));
  std::vector<double> times{out.burn_in};
  for (double l : lags) times.push_back(out.burn_in + l);
  const SsaSummary sum = summarize(ssa_simulate(net, theta, x0, times, trajectories, seed, policy));

  const auto& names = net.species();
  auto add = [&](std::string name, double pred, double est, double se) {
    MomentCheck c{std::move(name), pred, est, se, std::abs(est - pred) <= sigmas * se};
    out.checks.push_back(std::move(c));
  };
  for (int i = 0; i < N; ++i)
    add("mean(" + names[static_cast<std::size_t>(i)] + ")", ss.phi[i], sum.mean[0][i], sum.mean_se[0][i]);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j)
      add("cov(" + names[static_cast<std::size_t>(i)] + "," + names[static_cast<std::size_t>(j)] + ")",
          ss.V(i, j), sum.cov[0][0](i, j), sum.cov_se[0][0](i, j));
  for (std::size_t a = 0; a < lags.size(); ++a) {
    std::ostringstream lag;
    lag << lags[a];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        add("lagcov(" + names[static_cast<std::size_t>(i)] + "," + names[static_cast<std::size_t>(j)] +
                ";" + lag.str() + ")",
            lag_cov[a](i, j), sum.cov[0][a + 1](i, j), sum.cov_se[0][a + 1](i, j));
  }
  out.all_pass = std::all_of(out.checks.begin(), out.checks.end(), [](const MomentCheck& c) { return c.pass; });
  return out;
}

}  // namespace lnafim
