// lnafim: Fisher information of stochastic reaction networks under the
// linear noise approximation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lnafim/io.hpp"
#include "lnafim/oracle.hpp"
#include "lnafim/parser.hpp"

namespace fs = std::filesystem;
using namespace lnafim;
using io::json;

namespace {

constexpr const char* kInverseCovarianceNotice =
    "FIM mean term computed as dmu^T Sigma^-1 dmu (inverse covariance); the commonly printed "
    "form without the inverse is dimensionally inconsistent";

struct Globals {
  double rtol = 1e-8;
  double atol = 1e-10;
  std::string scale = "log";
  double rank_tol = kDefaultRankTolerance;
  std::string out = ".";
  std::uint64_t seed = 1;
  double jitter = 0.0;
};

struct Inputs {
  ReactionNetwork net;
  Vector theta;
};

std::string rep_json(const FimReport& r) { return io::to_json(r).dump(2) + "\n"; }
std::string cmp_json(const DesignComparison& c) { return io::to_json(c).dump(2) + "\n"; }

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(const Globals& g, std::string command) : g_(g) {
    manifest_.command = std::move(command);
    manifest_.started_at = utc_now();
    manifest_.solver = solver();
    manifest_.scale = scale();
    manifest_.jitter = g.jitter;
    if (g.jitter > 0.0)
      manifest_.warn("diagonal jitter " + io::format_double(g.jitter) + " added to every covariance");
    start_ = std::chrono::steady_clock::now();
  }

  SolverConfig solver() const {
    SolverConfig c;
    c.rtol = g_.rtol;
    c.atol = g_.atol;
    c.validate();
    return c;
  }

  ParamScale scale() const {
    if (g_.scale == "log") return ParamScale::Log;
    if (g_.scale == "natural") return ParamScale::Natural;
    throw InputError("--scale must be 'log' or 'natural'");
  }

  FimOptions fim_options() const {
    if (!(g_.jitter >= 0.0)) throw InputError("--jitter must be >= 0");
    FimOptions o;
    o.scale = scale();
    o.solver = solver();
    o.jitter = g_.jitter;
    return o;
  }

  double rank_tol() const {
    if (!(g_.rank_tol > 0.0 && g_.rank_tol < 1.0)) throw InputError("--rank-tol must lie in (0, 1)");
    return g_.rank_tol;
  }

  std::string input(const std::string& path) {
    std::string text = io::read_file(path);
    manifest_.add_input(path, text);
    return text;
  }

  Inputs model_and_params(const std::string& model, const std::string& params) {
    Inputs in{parse_model(input(model)), {}};
    in.theta = io::parse_params(input(params), in.net);
    manifest_.param_names = in.net.params();
    manifest_.theta = in.theta;
    return in;
  }

  ObservationDesign design(const std::string& path, const ReactionNetwork& net) {
    ObservationDesign d = io::parse_design(input(path), net, fs::path(path).stem().string());
    manifest_.regimes.push_back(to_string(d.regime));
    return d;
  }

  void write(const std::string& name, const std::string& content) {
    io::write_file(fs::path(g_.out) / name, content);
    manifest_.outputs.push_back(name);
  }

  void note_report(const FimReport& r, const std::string& label) {
    const std::string prefix = label.empty() ? "" : label + ": ";
    for (const auto& w : r.warnings) manifest_.warn(prefix + w);
    if (r.cr.singular)
      manifest_.warn(prefix + "FIM singular (rank " + std::to_string(r.rank) + " of " +
                     std::to_string(r.fim.rows()) + ")");
  }

  void note_clamped(int clamped, const std::string& label) {
    if (clamped > 0)
      manifest_.warn((label.empty() ? "" : label + ": ") + std::to_string(clamped) +
                     " slightly negative rates clamped to 0");
  }

  void seed_used(std::uint64_t seed) {
    manifest_.seed = seed;
    manifest_.has_seed = true;
  }

  io::RunManifest& manifest() { return manifest_; }

  void finish() {
    manifest_.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    io::write_file(fs::path(g_.out) / "manifest.json", manifest_.to_json().dump(2) + "\n");
  }

 private:
  const Globals& g_;
  io::RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

// -- fim ---------------------------------------------------------------------

struct FimArgs {
  std::string model, design, params;
  bool dump_trajectory = false;
};

int cmd_fim(const Globals& g, const FimArgs& a) {
  Run run(g, "fim");
  const Inputs in = run.model_and_params(a.model, a.params);
  const ObservationDesign d = run.design(a.design, in.net);
  const FimOptions opts = run.fim_options();
  int clamped = 0;
  const Matrix fim = design_fim(in.net, in.theta, d, opts, &clamped);
  FimReport rep = make_fim_report(fim, in.net.params(), in.theta, opts.scale, run.rank_tol());
  run.note_clamped(clamped, "");
  run.note_report(rep, "");
  run.manifest().warn(kInverseCovarianceNotice);

  run.write("fim.json", rep_json(rep));
  run.write("summary.txt", io::summary_text(rep));
  if (a.dump_trajectory) {
    const LnaTrajectory traj = integrate_lna(in.net, in.theta, d.init, d.times, opts.solver, false);
    run.write("trajectory.csv", io::trajectory_csv(traj, in.net.species()));
  }
  run.finish();
  std::cout << io::summary_text(rep);
  return 0;
}

// -- sweep -------------------------------------------------------------------

struct SweepArgs {
  std::string model, sweep, params;
  std::vector<std::string> criteria;
};

int cmd_sweep(const Globals& g, const SweepArgs& a) {
  Run run(g, "sweep");
  const Inputs in = run.model_and_params(a.model, a.params);
  SweepSpec spec = io::parse_sweep(run.input(a.sweep), in.net);
  for (const auto& c : a.criteria) {
    const Criterion cr = criterion_from_string(c);
    if (std::find(spec.criteria.begin(), spec.criteria.end(), cr) == spec.criteria.end())
      spec.criteria.push_back(cr);
  }
  run.manifest().regimes.push_back(to_string(spec.base.regime));
  const SweepResult res = sweep_delta(in.net, in.theta, spec, run.fim_options());
  int failed = 0;
  for (const auto& r : res.rows)
    if (r.status != "ok") ++failed;
  if (failed > 0) run.manifest().warn(std::to_string(failed) + " sweep rows failed (see status column)");
  for (const auto& r : res.rows)
    if (r.criterion == Criterion::LogDet && std::isinf(r.value) && r.value < 0) {
      run.manifest().warn("singular FIM at some grid points (log_det = -inf)");
      break;
    }
  run.manifest().warn(kInverseCovarianceNotice);
  run.write("sweep.csv", io::sweep_csv(res));
  run.write("sweep_optimum.json", io::to_json(res).dump(2) + "\n");
  run.finish();
  for (const auto& o : res.optima) {
    if (!o.found) {
      std::cout << to_string(o.criterion) << ": no finite value on the grid\n";
      continue;
    }
    std::cout << to_string(o.criterion) << ": best delta " << io::format_double(o.delta) << " ("
              << io::format_double(o.value) << ")";
    if (o.interior)
      std::cout << ", refined " << io::format_double(o.refined_delta) << " ("
                << io::format_double(o.refined_value) << ")";
    else
      std::cout << ", at the edge of the grid";
    std::cout << "\n";
  }
  return 0;
}

// -- ellipse -----------------------------------------------------------------

struct EllipseArgs {
  std::string model, design, params;
  std::vector<std::string> pair;
  double eps = 1.0;
  bool slice = false;
  int points = 256;
};

int cmd_ellipse(const Globals& g, const EllipseArgs& a) {
  if (!(a.eps > 0.0)) throw InputError("--eps must be > 0");
  if (a.pair.size() != 2) throw InputError("--pair needs two parameter names");
  if (a.points < 3) throw InputError("--points must be >= 3");
  Run run(g, "ellipse");
  const Inputs in = run.model_and_params(a.model, a.params);
  const int j = in.net.param_index(a.pair[0]);
  const int k = in.net.param_index(a.pair[1]);
  if (j < 0) throw InputError("--pair: unknown parameter '" + a.pair[0] + "'");
  if (k < 0) throw InputError("--pair: unknown parameter '" + a.pair[1] + "'");
  if (j == k) throw InputError("--pair: parameters must differ");
  const ObservationDesign d = run.design(a.design, in.net);
  const FimOptions opts = run.fim_options();
  int clamped = 0;
  const Matrix fim = design_fim(in.net, in.theta, d, opts, &clamped);
  run.note_clamped(clamped, "");
  const Vector center = opts.scale == ParamScale::Log ? Vector(in.theta.array().log()) : in.theta;
  const NeutralEllipse e = neutral_ellipsoid(fim, center, a.eps, j, k,
                                             a.slice ? CrossSection::Slice : CrossSection::Profile,
                                             a.points);
  if (!e.bounded) run.manifest().warn(e.unbounded_note);
  run.manifest().warn(kInverseCovarianceNotice);

  std::vector<std::string> cols = in.net.params();
  if (opts.scale == ParamScale::Log)
    for (auto& c : cols) c = "log_" + c;
  const std::string name =
      "ellipse_" + to_string(d.regime) + "_" + a.pair[0] + "_" + a.pair[1] + ".csv";
  run.write(name, io::ellipse_csv(e, cols));
  run.finish();
  std::cout << name << ": " << (a.slice ? "slice" : "profile") << " cross-section, ";
  if (e.bounded)
    std::cout << "semi-axes " << io::format_double(e.semi_axes[0]) << ", "
              << io::format_double(e.semi_axes[1]) << "\n";
  else
    std::cout << "unbounded: " << e.unbounded_note << "\n";
  return 0;
}

// -- compare -----------------------------------------------------------------

struct CompareArgs {
  std::string model, params;
  std::vector<std::string> designs;
};

int cmd_compare(const Globals& g, const CompareArgs& a) {
  if (a.designs.size() < 2) throw InputError("compare needs at least two --design files");
  Run run(g, "compare");
  const Inputs in = run.model_and_params(a.model, a.params);
  std::vector<ObservationDesign> designs;
  for (const auto& p : a.designs) designs.push_back(run.design(p, in.net));
  for (std::size_t i = 0; i < designs.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (designs[i].name == designs[k].name)
        designs[i].name += "_" + std::to_string(i + 1);
  const DesignComparison cmp = compare_designs(in.net, in.theta, designs, run.fim_options(), run.rank_tol());
  for (std::size_t d = 0; d < cmp.names.size(); ++d) run.note_report(cmp.reports[d], cmp.names[d]);
  for (const auto& w : cmp.warnings) run.manifest().warn(w);
  run.manifest().warn(kInverseCovarianceNotice);
  run.write("comparison.json", cmp_json(cmp));
  run.finish();
  for (std::size_t d = 0; d < cmp.names.size(); ++d)
    std::cout << cmp.names[d] << ": rank " << cmp.reports[d].rank << ", log_det "
              << io::format_double(cmp.reports[d].opt.log_det) << "\n";
  for (const auto& w : cmp.warnings) std::cout << "warning: " << w << "\n";
  return 0;
}

// -- validate ----------------------------------------------------------------

struct ValidateArgs {
  std::string model, params;
  std::vector<std::string> designs;
  int trajectories = 2000;
  int draws = 2000;
  int n = 20;
  double delta = 1.0;
};

ObservationDesign default_design(const ReactionNetwork& net, Regime r, int n, double delta) {
  ObservationDesign d;
  d.name = to_string(r);
  d.regime = r;
  for (int i = 1; i <= n; ++i) d.times.push_back(i * delta);
  for (int s = 0; s < net.num_species(); ++s) d.observed.push_back(s);
  d.sigma_eps2 = r == Regime::DT ? 1.0 : 0.0;
  return d;
}

int cmd_validate(const Globals& g, const ValidateArgs& a) {
  if (a.trajectories < 2) throw InputError("--trajectories must be >= 2");
  if (a.draws < 2) throw InputError("--draws must be >= 2");
  if (a.n < 1 || !(a.delta > 0.0)) throw InputError("--n must be >= 1 and --delta > 0");
  Run run(g, "validate");
  const Inputs in = run.model_and_params(a.model, a.params);
  std::vector<ObservationDesign> designs;
  if (a.designs.empty()) {
    for (Regime r : {Regime::TS, Regime::TP, Regime::DT})
      designs.push_back(default_design(in.net, r, a.n, a.delta));
    for (const auto& d : designs) run.manifest().regimes.push_back(to_string(d.regime));
  } else {
    for (const auto& p : a.designs) designs.push_back(run.design(p, in.net));
  }
  for (const auto& d : designs) d.validate(in.net);
  const FimOptions opts = run.fim_options();
  const std::uint64_t seed = g.seed;
  run.seed_used(seed);

  json report;
  bool all_pass = true;
  auto line = [&](bool pass, const std::string& what) {
    all_pass = all_pass && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << what << "\n";
  };

  // Variational derivatives against finite differences of re-integrated moments.
  json fd = json::array();
  for (const auto& d : designs) {
    int clamped = 0;
    const Matrix I = design_fim(in.net, in.theta, d, opts, &clamped);
    run.note_clamped(clamped, d.name);
    const FdFim ref = fd_fim(in.net, in.theta, d, 1e-5, opts.scale, oracle_solver_config(opts.solver));
    const double scale = std::max(I.cwiseAbs().maxCoeff(), 1e-300);
    double worst = 0.0;
    for (Eigen::Index r = 0; r < I.rows(); ++r)
      for (Eigen::Index c = 0; c < I.cols(); ++c) {
        const double denom = std::max({std::abs(I(r, c)), std::abs(ref.fim(r, c)), 1e-6 * scale});
        worst = std::max(worst, std::abs(I(r, c) - ref.fim(r, c)) / denom);
      }
    const bool pass = worst <= 1e-3 && ref.asymmetry <= 1e-6 * scale;
    fd.push_back({{"design", d.name}, {"max_rel_error", worst}, {"asymmetry", ref.asymmetry}, {"pass", pass}});
    line(pass, "fd-vs-variational " + d.name + " max rel error " + io::format_double(worst));
  }
  report["finite_difference"] = fd;

  // Score identity on the first stochastic design.
  json score = json::object();
  for (const auto& d : designs) {
    if (d.regime == Regime::DT) continue;
    const Matrix I = design_fim(in.net, in.theta, d, opts);
    const ScoreCheck sc = score_check(in.net, in.theta, d, a.draws, seed, 1e-4, opts.scale, opts.solver);
    bool mean_ok = true, cov_ok = true;
    for (Eigen::Index k = 0; k < sc.mean.size(); ++k) mean_ok = mean_ok && std::abs(sc.mean[k]) <= 4.0 * sc.mean_se[k];
    for (Eigen::Index k = 0; k < I.rows(); ++k)
      for (Eigen::Index l = 0; l < I.cols(); ++l)
        cov_ok = cov_ok && std::abs(sc.cov(k, l) - I(k, l)) <= 4.0 * sc.cov_se(k, l);
    score = {{"design", d.name},      {"draws", sc.draws},          {"mean", io::matrix_json(sc.mean)},
             {"mean_se", io::matrix_json(sc.mean_se)}, {"cov", io::matrix_json(sc.cov)},
             {"cov_se", io::matrix_json(sc.cov_se)},   {"fim", io::matrix_json(I)},
             {"mean_pass", mean_ok},  {"cov_pass", cov_ok}};
    line(mean_ok, "score mean within 4 SE of 0 (" + d.name + ", " + std::to_string(sc.draws) + " draws)");
    line(cov_ok, "score covariance within 4 SE of FIM (" + d.name + ")");
    break;
  }
  report["score_identity"] = score;

  // Exact stochastic simulation against the stationary LNA.
  const SsaStationaryCheck ssa = ssa_stationary_check(in.net, in.theta, {0.5, 1.0, 2.0}, a.trajectories, seed);
  json checks = json::array();
  for (const auto& c : ssa.checks) {
    checks.push_back({{"name", c.name}, {"predicted", c.predicted}, {"estimate", c.estimate}, {"se", c.se}, {"pass", c.pass}});
    line(c.pass, "ssa " + c.name + " predicted " + io::format_double(c.predicted) + " estimate " +
                     io::format_double(c.estimate) + " se " + io::format_double(c.se));
  }
  report["ssa"] = {{"trajectories", ssa.trajectories}, {"burn_in", ssa.burn_in}, {"lags", ssa.lags}, {"checks", checks}};
  report["all_pass"] = all_pass;
  if (!all_pass) run.manifest().warn("some oracle checks failed");
  run.manifest().warn(kInverseCovarianceNotice);
  run.write("validate.json", report.dump(2) + "\n");
  run.finish();
  std::cout << (all_pass ? "all oracle checks passed\n" : "some oracle checks FAILED\n");
  return all_pass ? 0 : 1;
}

// -- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string model, params, design;
  std::vector<double> times;
  std::vector<long long> x0;
  int trajectories = 1000;
  bool raw = false;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  Run run(g, "simulate");
  const Inputs in = run.model_and_params(a.model, a.params);
  std::vector<double> times = a.times;
  if (!a.design.empty()) {
    if (!times.empty()) throw InputError("give either --design or --times, not both");
    times = run.design(a.design, in.net).times;
  }
  if (times.empty()) throw InputError("no sampling times (use --times or --design)");
  std::vector<long long> x0 = a.x0;
  if (x0.empty()) {
    const StationaryState ss = stationary_state(in.net, in.theta, std::nullopt, run.solver(), false);
    for (Eigen::Index i = 0; i < ss.phi.size(); ++i) x0.push_back(std::llround(std::max(0.0, ss.phi[i])));
  }
  run.seed_used(g.seed);
  const SsaEnsemble ens = ssa_simulate(in.net, in.theta, x0, times, a.trajectories, g.seed);
  json summary = io::to_json(summarize(ens), in.net.species());
  summary["x0"] = x0;
  summary["seed"] = g.seed;
  run.write("ssa_summary.json", summary.dump(2) + "\n");
  if (a.raw) run.write("ssa_samples.csv", io::ssa_raw_csv(ens, in.net.species()));
  run.finish();
  std::cout << a.trajectories << " trajectories, " << ens.total_events << " events\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher information for stochastic reaction networks (linear noise approximation)"};
  app.require_subcommand(1);
  Globals g;
  auto add_globals = [&](CLI::App* s) {
    s->add_option("--rtol", g.rtol, "integrator relative tolerance")->capture_default_str();
    s->add_option("--atol", g.atol, "integrator absolute tolerance")->capture_default_str();
    s->add_option("--scale", g.scale, "parameter scale: log or natural")->capture_default_str();
    s->add_option("--rank-tol", g.rank_tol, "relative eigenvalue threshold for the rank")->capture_default_str();
    s->add_option("--out", g.out, "output directory")->capture_default_str();
    s->add_option("--seed", g.seed, "random seed")->capture_default_str();
    s->add_option("--jitter", g.jitter, "diagonal jitter added to every covariance")->capture_default_str();
  };

  FimArgs fa;
  auto* fim = app.add_subcommand("fim", "FIM, eigenanalysis and Cramer-Rao bounds for one design");
  fim->add_option("--model", fa.model)->required();
  fim->add_option("--design", fa.design)->required();
  fim->add_option("--params", fa.params)->required();
  fim->add_flag("--dump-trajectory", fa.dump_trajectory, "also write the LNA trajectory as CSV");
  add_globals(fim);

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "optimality criteria over a grid of sampling intervals");
  sweep->add_option("--model", sa.model)->required();
  sweep->add_option("--sweep", sa.sweep, "sweep specification JSON")->required();
  sweep->add_option("--params", sa.params)->required();
  sweep->add_option("--criterion", sa.criteria, "extra criterion: trace_inverse or min_eigenvalue");
  add_globals(sweep);

  EllipseArgs ea;
  auto* ellipse = app.add_subcommand("ellipse", "2-D cross-section of the neutral ellipsoid");
  ellipse->add_option("--model", ea.model)->required();
  ellipse->add_option("--design", ea.design)->required();
  ellipse->add_option("--params", ea.params)->required();
  ellipse->add_option("--pair", ea.pair, "two parameter names")->required()->expected(2);
  ellipse->add_option("--eps", ea.eps, "log-likelihood drop")->capture_default_str();
  ellipse->add_option("--points", ea.points)->capture_default_str();
  ellipse->add_flag("--slice", ea.slice, "hold the other parameters fixed instead of profiling");
  add_globals(ellipse);

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "compare FIM eigenvalues across designs");
  compare->add_option("--model", ca.model)->required();
  compare->add_option("--params", ca.params)->required();
  compare->add_option("--design", ca.designs, "design file (repeat)")->required();
  add_globals(compare);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "run the oracle suite");
  validate->add_option("--model", va.model)->required();
  validate->add_option("--params", va.params)->required();
  validate->add_option("--design", va.designs, "design file (repeat); default TS/TP/DT, all species");
  validate->add_option("--trajectories", va.trajectories)->capture_default_str();
  validate->add_option("--draws", va.draws, "synthetic data sets for the score check")->capture_default_str();
  validate->add_option("--n", va.n, "observations in the default designs")->capture_default_str();
  validate->add_option("--delta", va.delta, "sampling interval of the default designs")->capture_default_str();
  add_globals(validate);

  SimulateArgs ma;
  auto* simulate = app.add_subcommand("simulate", "exact stochastic simulation (Gillespie)");
  simulate->add_option("--model", ma.model)->required();
  simulate->add_option("--params", ma.params)->required();
  simulate->add_option("--design", ma.design, "take sampling times from a design file");
  simulate->add_option("--times", ma.times, "sampling times")->delimiter(',');
  simulate->add_option("--x0", ma.x0, "initial copy numbers (default: rounded stationary mean)")->delimiter(',');
  simulate->add_option("--trajectories", ma.trajectories)->capture_default_str();
  simulate->add_flag("--raw", ma.raw, "also write every sample as CSV");
  add_globals(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fim) return cmd_fim(g, fa);
    if (*sweep) return cmd_sweep(g, sa);
    if (*ellipse) return cmd_ellipse(g, ea);
    if (*compare) return cmd_compare(g, ca);
    if (*validate) return cmd_validate(g, va);
    if (*simulate) return cmd_simulate(g, ma);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error in " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
