#pragma once

#include <vector>

#include "lnafim/network.hpp"

namespace lnafim::detail {

// Total theta_l-derivatives of A and of EE^T along a solution whose
// theta_l-sensitivity is `sphi`:
//   At = S (d2F/dx dtheta_l + sum_m d2F/dx dx_m * sphi_m)
//   Dt = S diag(dF/dtheta_l + dF/dx sphi) S^T
inline void total_derivatives(const Matrix& S, const Matrix& dFdx, const Matrix& dFdth,
                              const std::vector<Matrix>& hxx, const std::vector<Matrix>& hxth,
                              int l, const Vector& sphi, Matrix& At, Matrix& Dt) {
  Matrix dfx = hxth[static_cast<std::size_t>(l)];
  for (Eigen::Index m = 0; m < sphi.size(); ++m)
    if (sphi[m] != 0.0) dfx.noalias() += sphi[m] * hxx[static_cast<std::size_t>(m)];
  At.noalias() = S * dfx;
  const Vector ft = dFdth.col(l) + dFdx * sphi;
  Dt.noalias() = S * ft.asDiagonal() * S.transpose();
}

}  // namespace lnafim::detail
