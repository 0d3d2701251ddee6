#include "lnafim/lna.hpp"

#include "lna_detail.hpp"

namespace lnafim {

InitialCondition InitialCondition::explicit_state(Vector phi0, Matrix V0) {
  InitialCondition ic;
  ic.mode = Mode::Explicit;
  ic.phi0 = std::move(phi0);
  ic.V0 = std::move(V0);
  return ic;
}

InitialCondition InitialCondition::stationary(double mean_scale, double var_scale) {
  InitialCondition ic;
  ic.mode = Mode::Stationary;
  ic.mean_scale = mean_scale;
  ic.var_scale = var_scale;
  return ic;
}

int packed_size(int n) { return n * (n + 1) / 2; }

void pack_symmetric(const Matrix& m, double* out) {
  const auto n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) *out++ = m(i, j);
}

Matrix unpack_symmetric(const double* packed, int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = *packed++;
  return m;
}

LnaSystem::LnaSystem(const ReactionNetwork& net, Vector theta, bool with_sensitivities)
    : net_(&net),
      theta_(std::move(theta)),
      sens_(with_sensitivities),
      n_(net.num_species()),
      block_(net.num_species() + packed_size(net.num_species()) +
             net.num_species() * net.num_species()) {
  if (theta_.size() != net.num_params())
    throw InputError("parameter vector has " + std::to_string(theta_.size()) +
                     " entries, model has " + std::to_string(net.num_params()) + " parameters");
}

void LnaSystem::operator()(double t, const Vector& y, Vector& dydt) {
  const Kinetics& kin = net_->kinetics();
  const Matrix& S = net_->stoichiometry_real();
  const int n = n_;
  const int L = net_->num_params();
  dydt.resize(y.size());

  const double* x = y.data();
  kin.rates(x, theta_.data(), t, F_);
  kin.rate_jacobian_x(x, theta_.data(), t, dFdx_);
  A_.noalias() = S * dFdx_;
  V_ = unpack_symmetric(y.data() + off_V(), n);
  Phi_ = Eigen::Map<const Matrix>(y.data() + off_Phi(), n, n);

  dydt.segment(off_phi(), n).noalias() = S * F_;
  Matrix dV = A_ * V_;
  dV += dV.transpose().eval();
  dV += diffusion_from_rates(S, F_, &clamped_);
  pack_symmetric(dV, dydt.data() + off_V());
  Eigen::Map<Matrix>(dydt.data() + off_Phi(), n, n).noalias() = A_ * Phi_;

  if (!sens_) return;

  kin.rate_jacobian_theta(x, theta_.data(), t, dFdth_);
  kin.rate_hessian_xx(x, theta_.data(), t, hxx_);
  kin.rate_hessian_xtheta(x, theta_.data(), t, hxth_);
  Matrix At, Dt;
  for (int l = 0; l < L; ++l) {
    const int b = block_ * (1 + l);
    const Vector sphi = y.segment(b + off_phi(), n);
    const Matrix sV = unpack_symmetric(y.data() + b + off_V(), n);
    const Eigen::Map<const Matrix> sPhi(y.data() + b + off_Phi(), n, n);
    detail::total_derivatives(S, dFdx_, dFdth_, hxx_, hxth_, l, sphi, At, Dt);

    dydt.segment(b + off_phi(), n).noalias() = A_ * sphi + S * dFdth_.col(l);
    Matrix dsV = A_ * sV + At * V_;
    dsV += dsV.transpose().eval();
    dsV += Dt;
    pack_symmetric(dsV, dydt.data() + b + off_V());
    Eigen::Map<Matrix>(dydt.data() + b + off_Phi(), n, n).noalias() = A_ * sPhi + At * Phi_;
  }
}

namespace {

void check_times(std::span<const double> times) {
  if (times.empty()) throw InputError("observation time grid is empty");
  if (!(times[0] >= 0.0)) throw InputError("observation times must be >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] >= times[i - 1])) throw InputError("observation times must be increasing");
}

}  // namespace

std::vector<Vector> integrate_mre(const ReactionNetwork& net, const Vector& theta,
                                  const Vector& phi0, std::span<const double> times,
                                  const SolverConfig& cfg) {
  check_times(times);
  if (phi0.size() != net.num_species()) throw InputError("phi0 has the wrong length");
  if (theta.size() != net.num_params()) throw InputError("parameter vector has the wrong length");
  const Kinetics& kin = net.kinetics();
  const Matrix& S = net.stoichiometry_real();
  Vector F;
  auto rhs = [&](double t, const Vector& y, Vector& dydt) {
    kin.rates(y.data(), theta.data(), t, F);
    dydt.noalias() = S * F;
  };
  DormandPrince45 solver(cfg);
  Vector y = phi0;
  std::vector<Vector> out;
  out.reserve(times.size());
  double t = 0.0;
  for (double ti : times) {
    solver.integrate(rhs, t, ti, y);
    out.push_back(y);
    t = ti;
  }
  return out;
}

LnaTrajectory integrate_lna(const ReactionNetwork& net, const Vector& theta,
                            const InitialCondition& ic, std::span<const double> times,
                            const SolverConfig& cfg, bool with_sensitivities) {
  check_times(times);
  const int n = net.num_species();
  const int L = net.num_params();
  LnaSystem sys(net, theta, with_sensitivities);

  // Resolve the initial condition and its theta-derivative.
  Vector phi0;
  Matrix V0;
  std::vector<Vector> dphi0(static_cast<std::size_t>(L), Vector::Zero(n));
  std::vector<Matrix> dV0(static_cast<std::size_t>(L), Matrix::Zero(n, n));
  if (ic.mode == InitialCondition::Mode::Explicit) {
    if (ic.phi0.size() != n || ic.V0.rows() != n || ic.V0.cols() != n)
      throw InputError("explicit initial condition has the wrong dimensions");
    if ((ic.V0 - ic.V0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + ic.V0.cwiseAbs().maxCoeff()))
      throw InputError("initial variance V0 must be symmetric");
    phi0 = ic.phi0;
    V0 = ic.V0;
  } else {
    const StationaryState ss = stationary_state(net, theta, ic.guess, cfg, with_sensitivities);
    phi0 = ic.mean_scale * ss.phi;
    V0 = ic.var_scale * ss.V;
    if (with_sensitivities)
      for (int l = 0; l < L; ++l) {
        dphi0[static_cast<std::size_t>(l)] = ic.mean_scale * ss.dphi[static_cast<std::size_t>(l)];
        dV0[static_cast<std::size_t>(l)] = ic.var_scale * ss.dV[static_cast<std::size_t>(l)];
      }
  }

  const int B = sys.block_size();
  Vector y = Vector::Zero(sys.state_size());
  y.segment(sys.off_phi(), n) = phi0;
  pack_symmetric(V0, y.data() + sys.off_V());
  if (with_sensitivities)
    for (int l = 0; l < L; ++l) {
      const int b = B * (1 + l);
      y.segment(b + sys.off_phi(), n) = dphi0[static_cast<std::size_t>(l)];
      pack_symmetric(dV0[static_cast<std::size_t>(l)], y.data() + b + sys.off_V());
    }

  auto reset_propagators = [&] {
    Eigen::Map<Matrix>(y.data() + sys.off_Phi(), n, n).setIdentity();
    if (with_sensitivities)
      for (int l = 0; l < L; ++l)
        Eigen::Map<Matrix>(y.data() + B * (1 + l) + sys.off_Phi(), n, n).setZero();
  };

  LnaTrajectory traj;
  traj.has_sensitivities = with_sensitivities;
  const std::size_t nt = times.size();
  traj.times.assign(times.begin(), times.end());
  traj.phi.reserve(nt);
  traj.V.reserve(nt);
  if (with_sensitivities) {
    traj.dphi.resize(nt);
    traj.dV.resize(nt);
    traj.dPhi.resize(nt - 1);
  }

  DormandPrince45 solver(cfg);
  double t = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    reset_propagators();
    solver.integrate(sys, t, times[i], y);
    t = times[i];
    if (i > 0) {
      traj.Phi.push_back(Eigen::Map<const Matrix>(y.data() + sys.off_Phi(), n, n));
      if (with_sensitivities)
        for (int l = 0; l < L; ++l)
          traj.dPhi[i - 1].push_back(
              Eigen::Map<const Matrix>(y.data() + B * (1 + l) + sys.off_Phi(), n, n));
    }
    traj.phi.push_back(y.segment(sys.off_phi(), n));
    traj.V.push_back(unpack_symmetric(y.data() + sys.off_V(), n));
    if (with_sensitivities)
      for (int l = 0; l < L; ++l) {
        const int b = B * (1 + l);
        traj.dphi[i].push_back(y.segment(b + sys.off_phi(), n));
        traj.dV[i].push_back(unpack_symmetric(y.data() + b + sys.off_V(), n));
      }
  }
  traj.clamped_rates = sys.clamped_rates();
  traj.stats = solver.stats();
  return traj;
}

Matrix compose_propagators(std::span<const Matrix> props) {
  if (props.empty()) throw std::invalid_argument("compose_propagators: empty product");
  Matrix out = props[0];
  for (std::size_t m = 1; m < props.size(); ++m) out = props[m] * out;
  return out;
}

std::pair<Matrix, std::vector<Matrix>> compose_propagators(
    std::span<const Matrix> props, std::span<const std::vector<Matrix>> dprops) {
  if (props.empty()) throw std::invalid_argument("compose_propagators: empty product");
  if (dprops.size() != props.size())
    throw std::invalid_argument("compose_propagators: derivative count mismatch");
  Matrix out = props[0];
  std::vector<Matrix> dout = dprops[0];
  for (std::size_t m = 1; m < props.size(); ++m) {
    for (std::size_t l = 0; l < dout.size(); ++l)
      dout[l] = (dprops[m][l] * out + props[m] * dout[l]).eval();
    out = props[m] * out;
  }
  return {std::move(out), std::move(dout)};
}

}  // namespace lnafim
