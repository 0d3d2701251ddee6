#include "lnafim/design.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <omp.h>

namespace lnafim {

Matrix design_fim(const ReactionNetwork& net, const Vector& theta, const ObservationDesign& design,
                  const FimOptions& opts, int* clamped_rates) {
  const MomentStack stack =
      compute_moments(net, theta, design, opts.solver, true, opts.jitter, clamped_rates);
  const Matrix fim = compute_fim(stack, opts.exec);
  return opts.scale == ParamScale::Log ? to_log_scale(fim, theta) : fim;
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::LogDet: return "log_det";
    case Criterion::TraceInverse: return "trace_inverse";
    case Criterion::MinEigenvalue: return "min_eigenvalue";
  }
  return "?";
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "log_det") return Criterion::LogDet;
  if (s == "trace_inverse") return Criterion::TraceInverse;
  if (s == "min_eigenvalue") return Criterion::MinEigenvalue;
  throw InputError("unknown criterion '" + s + "' (expected log_det, trace_inverse or min_eigenvalue)");
}

double criterion_value(const Matrix& fim, Criterion c) {
  switch (c) {
    case Criterion::LogDet: return optimality_scalars(fim).log_det;
    case Criterion::TraceInverse: return optimality_scalars(fim).trace_inverse;
    case Criterion::MinEigenvalue: {
      const auto ea = eigen_analysis(fim);
      return ea.values[ea.values.size() - 1];
    }
  }
  return 0.0;
}

bool criterion_maximized(Criterion c) { return c != Criterion::TraceInverse; }

std::vector<double> logspace(double from, double to, int count) {
  if (count < 1 || !(from > 0.0) || !(to > 0.0))
    throw InputError("logspace needs positive bounds and count >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = from;
    return out;
  }
  const double a = std::log(from), b = std::log(to);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = from;
  out.back() = to;
  return out;
}

void SweepSpec::validate() const {
  if (deltas.empty()) throw InputError("sweep: delta grid is empty");
  for (double d : deltas)
    if (!(d > 0.0)) throw InputError("sweep: delta values must be > 0");
  if (n < 1) throw InputError("sweep: n must be >= 1");
  if (criteria.empty()) throw InputError("sweep: no criterion");
}

ObservationDesign SweepSpec::design_at(double delta) const {
  ObservationDesign d = base;
  d.times.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d.times[static_cast<std::size_t>(i)] = (i + 1) * delta;
  return d;
}

std::vector<double> SweepResult::values(Criterion c) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.criterion == c) out.push_back(r.value);
  return out;
}

namespace {

SweepOptimum locate_optimum(const SweepSpec& spec, const SweepResult& res, Criterion c) {
  SweepOptimum opt;
  opt.criterion = c;
  const std::vector<double> v = res.values(c);
  const bool maximize = criterion_maximized(c);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isnan(v[i]) || std::isinf(v[i])) continue;
    if (!opt.found || (maximize ? v[i] > opt.value : v[i] < opt.value)) {
      opt.found = true;
      opt.index = static_cast<int>(i);
      opt.value = v[i];
    }
  }
  if (!opt.found) return opt;
  const auto b = static_cast<std::size_t>(opt.index);
  opt.delta = spec.deltas[b];
  opt.refined_delta = opt.delta;
  opt.refined_value = opt.value;
  opt.interior = b > 0 && b + 1 < v.size();
  if (!opt.interior || !std::isfinite(v[b - 1]) || !std::isfinite(v[b + 1])) return opt;
  // Three-point parabola through (log delta, value).
  const double xa = std::log(spec.deltas[b - 1]), xb = std::log(spec.deltas[b]),
               xc = std::log(spec.deltas[b + 1]);
  const double fa = v[b - 1], fb = v[b], fc = v[b + 1];
  const double num = (xb - xa) * (xb - xa) * (fb - fc) - (xb - xc) * (xb - xc) * (fb - fa);
  const double den = (xb - xa) * (fb - fc) - (xb - xc) * (fb - fa);
  if (den == 0.0) return opt;
  const double xv = xb - 0.5 * num / den;
  if (xv <= xa || xv >= xc) return opt;
  // Value of the interpolating parabola at its vertex (Lagrange form).
  const double la = (xv - xb) * (xv - xc) / ((xa - xb) * (xa - xc));
  const double lb = (xv - xa) * (xv - xc) / ((xb - xa) * (xb - xc));
  const double lc = (xv - xa) * (xv - xb) / ((xc - xa) * (xc - xb));
  opt.refined_delta = std::exp(xv);
  opt.refined_value = fa * la + fb * lb + fc * lc;
  return opt;
}

}  // namespace

SweepResult sweep_delta(const ReactionNetwork& net, const Vector& theta, const SweepSpec& spec,
                        const FimOptions& opts, ExecPolicy policy) {
  spec.validate();
  const int nd = static_cast<int>(spec.deltas.size());
  const auto nc = spec.criteria.size();
  SweepResult res;
  res.rows.resize(static_cast<std::size_t>(nd) * nc);

  auto evaluate = [&](int i) {
    const double delta = spec.deltas[static_cast<std::size_t>(i)];
    const std::size_t base = static_cast<std::size_t>(i) * nc;
    for (std::size_t c = 0; c < nc; ++c) {
      res.rows[base + c].delta = delta;
      res.rows[base + c].criterion = spec.criteria[c];
    }
    try {
      const Matrix fim = design_fim(net, theta, spec.design_at(delta), opts);
      for (std::size_t c = 0; c < nc; ++c)
        res.rows[base + c].value = criterion_value(fim, spec.criteria[c]);
    } catch (const std::exception& e) {
      for (std::size_t c = 0; c < nc; ++c) {
        res.rows[base + c].value = std::numeric_limits<double>::quiet_NaN();
        res.rows[base + c].status = std::string("error: ") + e.what();
      }
    }
  };

  if (policy == ExecPolicy::Serial) {
    for (int i = 0; i < nd; ++i) evaluate(i);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < nd; ++i) evaluate(i);
  }

  for (Criterion c : spec.criteria) res.optima.push_back(locate_optimum(spec, res, c));
  return res;
}

DesignComparison compare_designs(const ReactionNetwork& net, const Vector& theta,
                                 const std::vector<ObservationDesign>& designs,
                                 const FimOptions& opts, double rank_tol) {
  if (designs.empty()) throw InputError("compare: no designs given");
  for (const auto& d : designs)
    if (d.times != designs.front().times)
      throw InputError("compare: design '" + d.name + "' uses a different time grid than '" +
                       designs.front().name + "'");

  DesignComparison out;
  std::set<Regime> regimes;
  for (const auto& d : designs) {
    int clamped = 0;
    const Matrix fim = design_fim(net, theta, d, opts, &clamped);
    out.names.push_back(d.name);
    out.reports.push_back(make_fim_report(fim, net.params(), theta, opts.scale, rank_tol));
    if (clamped > 0)
      out.reports.back().warnings.push_back(std::to_string(clamped) +
                                            " slightly negative rates clamped to 0");
    regimes.insert(d.regime);
  }
  if (regimes.count(Regime::DT) != 0 && regimes.size() > 1)
    out.warnings.push_back(
        "DT information scales with 1/sigma_eps2: absolute DT values can not be compared with "
        "TS/TP; only normalized eigenvalues are comparable");

  const auto nd = static_cast<Eigen::Index>(designs.size());
  const Eigen::Index L = net.num_params();
  out.eig_per_design.resize(nd, L);
  out.eig_global.resize(nd, L);
  double global_max = 0.0;
  for (const auto& r : out.reports) global_max = std::max(global_max, r.eig.values[0]);
  for (Eigen::Index d = 0; d < nd; ++d) {
    const Vector& lam = out.reports[static_cast<std::size_t>(d)].eig.values;
    const double own = lam[0];
    out.eig_per_design.row(d) = own > 0.0 ? Vector(lam / own) : Vector(Vector::Zero(L));
    out.eig_global.row(d) = global_max > 0.0 ? Vector(lam / global_max) : Vector(Vector::Zero(L));
  }
  return out;
}

}  // namespace lnafim
