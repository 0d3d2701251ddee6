#include <cmath>
#include <sstream>

#include "lna_detail.hpp"
#include "lnafim/lna.hpp"

namespace lnafim {

namespace {

// Linear map X -> A X + X A^T restricted to symmetric X, in packed
// coordinates.
Matrix lyapunov_operator(const Matrix& A) {
  const auto n = static_cast<int>(A.rows());
  const int p = packed_size(n);
  Matrix M(p, p);
  Matrix E = Matrix::Zero(n, n);
  int col = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b, ++col) {
      E.setZero();
      E(a, b) = E(b, a) = 1.0;
      Matrix img = A * E;
      img += img.transpose().eval();
      pack_symmetric(img, M.col(col).data());
    }
  return M;
}

Matrix lyapunov_solve(const Eigen::FullPivLU<Matrix>& lu, const Matrix& Q) {
  const auto n = static_cast<int>(Q.rows());
  Vector rhs(packed_size(n));
  pack_symmetric(Q, rhs.data());
  const Vector x = lu.solve(-rhs);
  return unpack_symmetric(x.data(), n);
}

double residual_scale(const Vector& F) { return 1.0 + F.cwiseAbs().sum(); }

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  Eigen::FullPivLU<Matrix> lu(lyapunov_operator(A));
  if (!lu.isInvertible())
    throw NumericalError("solve_lyapunov", "Lyapunov operator is singular");
  return lyapunov_solve(lu, Q);
}

StationaryState stationary_state(const ReactionNetwork& net, const Vector& theta,
                                 const std::optional<Vector>& guess, const SolverConfig& cfg,
                                 bool with_sensitivities) {
  const int n = net.num_species();
  const int L = net.num_params();
  if (theta.size() != L) throw InputError("parameter vector has the wrong length");
  const Kinetics& kin = net.kinetics();
  const Matrix& S = net.stoichiometry_real();

  Vector phi = guess ? *guess : Vector::Ones(n);
  if (phi.size() != n) throw InputError("stationary guess has the wrong length");

  Vector F;
  Matrix dFdx;
  auto residual = [&](const Vector& x, Vector& g) {
    kin.rates(x.data(), theta.data(), 0.0, F);
    g.noalias() = S * F;
    return g.cwiseAbs().maxCoeff() / residual_scale(F);
  };

  auto newton = [&](Vector& x, int& iters) {
    Vector g;
    double res = residual(x, g);
    for (iters = 0; iters < 200 && res >= 1e-10; ++iters) {
      kin.rate_jacobian_x(x.data(), theta.data(), 0.0, dFdx);
      const Matrix A = S * dFdx;
      Eigen::FullPivLU<Matrix> lu(A);
      if (!lu.isInvertible()) return false;
      const Vector dx = lu.solve(-g);
      double lambda = 1.0;
      bool improved = false;
      for (int k = 0; k < 40; ++k, lambda *= 0.5) {
        Vector trial = x + lambda * dx;
        Vector gt;
        double rt;
        try {
          rt = residual(trial, gt);
        } catch (const EvalError&) {
          continue;
        }
        if (std::isfinite(rt) && rt < res) {
          x = std::move(trial);
          g = std::move(gt);
          res = rt;
          improved = true;
          break;
        }
      }
      if (!improved) return false;
    }
    return res < 1e-10;
  };

  int iters = 0;
  bool ok = false;
  try {
    ok = newton(phi, iters);
  } catch (const EvalError&) {
    ok = false;
  }
  if (!ok) {
    // Relax along the MRE first, then polish.
    Vector start = guess ? *guess : Vector::Ones(n);
    try {
      const double horizon[] = {1e3};
      phi = integrate_mre(net, theta, start, horizon, cfg).back();
      ok = newton(phi, iters);
    } catch (const NumericalError&) {
      ok = false;
    }
  }
  if (!ok) throw NumericalError("stationary_state", "Newton iteration did not converge");

  Vector g;
  StationaryState out;
  out.residual = residual(phi, g);
  out.newton_iterations = iters;
  out.phi = phi;

  kin.rates(phi.data(), theta.data(), 0.0, F);
  kin.rate_jacobian_x(phi.data(), theta.data(), 0.0, dFdx);
  const Matrix A = S * dFdx;
  const Eigen::VectorXcd eig = A.eigenvalues();
  const double max_re = eig.real().maxCoeff();
  if (!(max_re < 0.0)) {
    std::ostringstream msg;
    msg << "no stable stationary LNA (Jacobian eigenvalue with real part " << max_re << " >= 0)";
    throw NumericalError("stationary_state", msg.str());
  }

  Eigen::FullPivLU<Matrix> lyap(lyapunov_operator(A));
  if (!lyap.isInvertible())
    throw NumericalError("stationary_state", "no stable stationary LNA (singular Lyapunov operator)");
  out.V = lyapunov_solve(lyap, diffusion_from_rates(S, F));

  if (!with_sensitivities) return out;
  out.has_sensitivities = true;

  Matrix dFdth;
  std::vector<Matrix> hxx, hxth;
  kin.rate_jacobian_theta(phi.data(), theta.data(), 0.0, dFdth);
  kin.rate_hessian_xx(phi.data(), theta.data(), 0.0, hxx);
  kin.rate_hessian_xtheta(phi.data(), theta.data(), 0.0, hxth);
  Eigen::FullPivLU<Matrix> alu(A);
  Matrix At, Dt;
  for (int l = 0; l < L; ++l) {
    // 0 = A dphi + S dF/dtheta_l
    const Vector dphi = alu.solve(-(S * dFdth.col(l)));
    detail::total_derivatives(S, dFdx, dFdth, hxx, hxth, l, dphi, At, Dt);
    Matrix Q = At * out.V;
    Q += Q.transpose().eval();
    Q += Dt;
    out.dphi.push_back(dphi);
    out.dV.push_back(lyapunov_solve(lyap, Q));
  }
  return out;
}

}  // namespace lnafim
