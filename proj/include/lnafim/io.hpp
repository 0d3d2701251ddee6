#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lnafim/design.hpp"
#include "lnafim/ssa.hpp"

namespace lnafim::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.3.0";

std::string read_file(const std::filesystem::path& path);  // InputError when unreadable
void write_file(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite.
std::string format_double(double v);
/// Finite doubles as numbers, non-finite ones as the strings above.
json number(double v);

std::string sha256_hex(const std::string& data);

// -- inputs ------------------------------------------------------------------

/// {"name": value, ...}; every model parameter exactly once.
Vector parse_params(const std::string& text, const ReactionNetwork& net);

/// {"regime": "TS|TP|DT", "times": [...] | "n" + "delta", "observed": [...],
///  "sigma_eps2": s, "init": {"mode": "stationary", "mean_scale", "var_scale"}
///  | {"mode": "explicit", "phi0": [...], "V0": [[...], ...]}}
/// Errors cite the offending key.
ObservationDesign design_from_json(const json& j, const ReactionNetwork& net,
                                   const std::string& name);
ObservationDesign parse_design(const std::string& text, const ReactionNetwork& net,
                               const std::string& name);

/// {"design": {...design without times...}, "n": 50,
///  "deltas": [...] | "delta_grid": {"from", "to", "count"}, "criteria": [...]}
SweepSpec parse_sweep(const std::string& text, const ReactionNetwork& net);

// -- outputs -----------------------------------------------------------------

json matrix_json(const Matrix& m);
json to_json(const FimReport& r);
std::string summary_text(const FimReport& r);
std::string ellipse_csv(const NeutralEllipse& e, const std::vector<std::string>& names);
std::string sweep_csv(const SweepResult& r);
json to_json(const SweepResult& r);  // optima
json to_json(const DesignComparison& c);
json to_json(const SsaSummary& s, const std::vector<std::string>& species);
std::string ssa_raw_csv(const SsaEnsemble& e, const std::vector<std::string>& species);
/// Debug dump: t, phi_1..phi_N, packed upper triangle of V.
std::string trajectory_csv(const LnaTrajectory& traj, const std::vector<std::string>& species);

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::vector<std::string> param_names;
  Vector theta;
  SolverConfig solver;
  ParamScale scale = ParamScale::Log;
  std::vector<std::string> regimes;
  double jitter = 0.0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  double wall_clock_seconds = 0.0;
  std::string started_at;  // ISO-8601 UTC

  void add_input(const std::string& path, const std::string& content);
  void warn(const std::string& w);  // deduplicated
  json to_json() const;
};

}  // namespace lnafim::io
