#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "lnafim/errors.hpp"

namespace lnafim {

struct SolverConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 200000;

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw InputError("solver tolerances must be > 0");
    if (!(max_step > 0.0)) throw InputError("solver max_step must be > 0");
    if (max_steps < 1) throw InputError("solver max_steps must be >= 1");
  }
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

/// Dormand-Prince 5(4) with FSAL and a PI step-size controller.
///
/// The right-hand side is any callable `rhs(t, y, dydt)` writing into a
/// preallocated `Eigen::VectorXd`. integrate() lands exactly on `t1`; the
/// last accepted step size is kept as the first guess for the next call,
/// so consecutive intervals of one trajectory share step history.
class DormandPrince45 {
 public:
  explicit DormandPrince45(SolverConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const IntegratorStats& stats() const { return stats_; }
  const SolverConfig& config() const { return cfg_; }

  template <class Rhs>
  void integrate(Rhs&& rhs, double t0, double t1, Eigen::VectorXd& y) {
    if (t1 < t0) throw std::logic_error("DormandPrince45: t1 < t0");
    if (t1 == t0) return;
    resize(y.size());

    double t = t0;
    rhs(t, y, k1_);
    ++stats_.rhs_evals;
    double h = h_next_ > 0.0 ? h_next_ : initial_step(rhs, t0, y, t1 - t0);
    double err_prev = 1e-4;
    long steps = 0;
    bool last_rejected = false;

    while (t < t1) {
      if (++steps > cfg_.max_steps)
        throw NumericalError("integrator", "maximum number of steps (" +
                                               std::to_string(cfg_.max_steps) + ") exceeded at t=" +
                                               std::to_string(t));
      h = std::min(h, cfg_.max_step);
      if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
        throw NumericalError("integrator", "step size underflow at t=" + std::to_string(t));
      // Stretch a step that would stop just short of t1 instead of leaving a sliver.
      const bool hits_end = t + 1.01 * h >= t1;
      if (hits_end) h = t1 - t;

      step(rhs, t, h, y);
      const double err = error_norm(y);
      if (!std::isfinite(err))
        throw NumericalError("integrator", "non-finite state at t=" + std::to_string(t));

      if (err <= 1.0) {
        ++stats_.accepted;
        t = hits_end ? t1 : t + h;
        y.swap(ynew_);
        k1_.swap(k7_);
        double fac = 0.9 * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
        if (err == 0.0) fac = kFacMax;
        fac = std::clamp(fac, kFacMin, kFacMax);
        if (last_rejected) fac = std::min(fac, 1.0);
        err_prev = std::max(err, 1e-4);
        last_rejected = false;
        // A step truncated by the interval end says little about the natural
        // step size, so it only seeds h_next_ when nothing better is known.
        if (!hits_end || h_next_ == 0.0) h_next_ = h * fac;
        h *= fac;
      } else {
        ++stats_.rejected;
        h *= std::max(kFacMin, 0.9 * std::pow(err, -kAlpha));
        last_rejected = true;
      }
    }
  }

 private:
  static constexpr double kBeta = 0.04;
  static constexpr double kAlpha = 0.2 - 0.75 * kBeta;
  static constexpr double kFacMin = 0.2;
  static constexpr double kFacMax = 10.0;

  void resize(Eigen::Index n) {
    if (k1_.size() == n) return;
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &yerr_})
      v->resize(n);
  }

  template <class Rhs>
  double initial_step(Rhs& rhs, double t0, const Eigen::VectorXd& y0, double span) {
    const Eigen::ArrayXd sc = cfg_.atol + cfg_.rtol * y0.array().abs();
    const double d0 = std::sqrt((y0.array() / sc).square().mean());
    const double d1 = std::sqrt((k1_.array() / sc).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    ytmp_ = y0 + h0 * k1_;
    rhs(t0 + h0, ytmp_, k2_);
    ++stats_.rhs_evals;
    const double d2 = std::sqrt(((k2_ - k1_).array() / sc).square().mean()) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, span});
  }

  template <class Rhs>
  void step(Rhs& rhs, double t, double h, const Eigen::VectorXd& y) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    ytmp_ = y + h * a21 * k1_;
    rhs(t + c2 * h, ytmp_, k2_);
    ytmp_ = y + h * (a31 * k1_ + a32 * k2_);
    rhs(t + c3 * h, ytmp_, k3_);
    ytmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs(t + c4 * h, ytmp_, k4_);
    ytmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs(t + c5 * h, ytmp_, k5_);
    ytmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs(t + h, ytmp_, k6_);
    ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs(t + h, ynew_, k7_);
    stats_.rhs_evals += 6;
    yerr_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
  }

  double error_norm(const Eigen::VectorXd& y) const {
    const Eigen::ArrayXd sc = cfg_.atol + cfg_.rtol * y.array().abs().max(ynew_.array().abs());
    return std::sqrt((yerr_.array() / sc).square().mean());
  }

  SolverConfig cfg_;
  IntegratorStats stats_;
  double h_next_ = 0.0;
  Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, yerr_;
};

}  // namespace lnafim
