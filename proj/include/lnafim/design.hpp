#pragma once

#include <string>
#include <vector>

#include "lnafim/fisher.hpp"

namespace lnafim {

struct FimOptions {
  ParamScale scale = ParamScale::Log;
  SolverConfig solver;
  double jitter = 0.0;
  ExecPolicy exec = ExecPolicy::Parallel;
};

/// Full pipeline for one design: LNA + sensitivities, moment assembly,
/// Fisher information, optional log-scale transform.
Matrix design_fim(const ReactionNetwork& net, const Vector& theta, const ObservationDesign& design,
                  const FimOptions& opts = {}, int* clamped_rates = nullptr);

enum class Criterion { LogDet, TraceInverse, MinEigenvalue };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);  // throws InputError
double criterion_value(const Matrix& fim, Criterion c);
/// LogDet and MinEigenvalue are maximized, TraceInverse minimized.
bool criterion_maximized(Criterion c);

/// `count` points from `from` to `to`, equally spaced in log.
std::vector<double> logspace(double from, double to, int count);

struct SweepSpec {
  ObservationDesign base;
  std::vector<double> deltas;
  int n = 50;
  std::vector<Criterion> criteria{Criterion::LogDet};

  /// Throws InputError on an empty grid, non-positive deltas or n < 1.
  void validate() const;
  /// base with times = i * delta, i = 1..n.
  ObservationDesign design_at(double delta) const;
};

struct SweepRow {
  double delta = 0.0;
  Criterion criterion = Criterion::LogDet;
  double value = 0.0;
  std::string status = "ok";
};

struct SweepOptimum {
  Criterion criterion = Criterion::LogDet;
  bool found = false;
  int index = -1;
  double delta = 0.0;
  double value = 0.0;
  bool interior = false;
  double refined_delta = 0.0;  // parabola vertex in log(delta)
  double refined_value = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grid order, criteria interleaved per delta
  std::vector<SweepOptimum> optima;
  std::vector<double> values(Criterion c) const;
};

/// One pipeline evaluation per delta. A failing delta becomes a row with
/// status "error: ..." and the sweep continues. Rows are ordered by grid
/// index regardless of scheduling, and Serial/Parallel give identical bits.
SweepResult sweep_delta(const ReactionNetwork& net, const Vector& theta, const SweepSpec& spec,
                        const FimOptions& opts = {}, ExecPolicy policy = ExecPolicy::Parallel);

struct DesignComparison {
  std::vector<std::string> names;
  std::vector<FimReport> reports;
  Matrix eig_per_design;  // row d: eigenvalues / lambda_1 of design d
  Matrix eig_global;      // row d: eigenvalues / max over designs of lambda_1
  std::vector<std::string> warnings;
};

/// Designs must share their time grid. Emits a warning whenever DT is
/// compared against TS/TP, since DT magnitudes scale with 1 / sigma_eps2.
DesignComparison compare_designs(const ReactionNetwork& net, const Vector& theta,
                                 const std::vector<ObservationDesign>& designs,
                                 const FimOptions& opts = {},
                                 double rank_tol = kDefaultRankTolerance);

}  // namespace lnafim
