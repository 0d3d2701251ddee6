#include "lnafim/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace lnafim::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("manifest", "SHA-256 digest failed");
  std::ostringstream ss;
  ss << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) ss << std::setw(2) << static_cast<int>(md[i]);
  return ss.str();
}

// -- inputs ------------------------------------------------------------------

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(what + ": invalid JSON (" + e.what() + ")");
  }
}

void require_object(const json& j, const std::string& what) {
  if (!j.is_object()) throw InputError(what + ": expected a JSON object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  for (const auto& [key, _] : j.items())
    if (allowed.count(key) == 0) throw InputError(what + ": unknown key '" + key + "'");
}

double get_number(const json& j, const std::string& key, const std::string& what) {
  const json& v = j.at(key);
  if (!v.is_number()) throw InputError(what + ": key '" + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& what) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw InputError(what + ": key '" + key + "' must be an integer");
  return v.get<int>();
}

std::vector<double> get_numbers(const json& j, const std::string& key, const std::string& what) {
  const json& v = j.at(key);
  if (!v.is_array()) throw InputError(what + ": key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw InputError(what + ": key '" + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

InitialCondition init_from_json(const json& j, const ReactionNetwork& net, const std::string& what) {
  const std::string w = what + ": key 'init'";
  if (!j.is_object()) throw InputError(w + " must be an object");
  if (!j.contains("mode") || !j.at("mode").is_string())
    throw InputError(w + ": key 'mode' must be \"stationary\" or \"explicit\"");
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "stationary") {
    reject_unknown(j, {"mode", "mean_scale", "var_scale"}, w);
    const double ms = j.contains("mean_scale") ? get_number(j, "mean_scale", w) : 1.0;
    const double vs = j.contains("var_scale") ? get_number(j, "var_scale", w) : 1.0;
    if (!(ms > 0.0)) throw InputError(w + ": key 'mean_scale' must be > 0");
    if (!(vs >= 0.0)) throw InputError(w + ": key 'var_scale' must be >= 0");
    return InitialCondition::stationary(ms, vs);
  }
  if (mode != "explicit") throw InputError(w + ": key 'mode' must be \"stationary\" or \"explicit\"");
  reject_unknown(j, {"mode", "phi0", "V0"}, w);
  const int N = net.num_species();
  if (!j.contains("phi0")) throw InputError(w + ": missing key 'phi0'");
  if (!j.contains("V0")) throw InputError(w + ": missing key 'V0'");
  const std::vector<double> phi = get_numbers(j, "phi0", w);
  if (static_cast<int>(phi.size()) != N)
    throw InputError(w + ": key 'phi0' needs " + std::to_string(N) + " entries");
  const json& vj = j.at("V0");
  if (!vj.is_array() || static_cast<int>(vj.size()) != N)
    throw InputError(w + ": key 'V0' must be an " + std::to_string(N) + "x" + std::to_string(N) +
                     " array of rows");
  Matrix V0(N, N);
  for (int r = 0; r < N; ++r) {
    const json& row = vj[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != N)
      throw InputError(w + ": key 'V0' row " + std::to_string(r) + " has the wrong length");
    for (int c = 0; c < N; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        throw InputError(w + ": key 'V0' must contain numbers");
      V0(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  if ((V0 - V0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + V0.cwiseAbs().maxCoeff()))
    throw InputError(w + ": key 'V0' must be symmetric");
  return InitialCondition::explicit_state(Eigen::Map<const Vector>(phi.data(), N), V0);
}

ObservationDesign design_fields(const json& j, const ReactionNetwork& net, const std::string& name,
                                bool need_times) {
  const std::string what = "design '" + name + "'";
  require_object(j, what);
  reject_unknown(j, {"regime", "times", "n", "delta", "observed", "sigma_eps2", "init", "name"}, what);
  ObservationDesign d;
  d.name = name;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw InputError(what + ": key 'name' must be a string");
    d.name = j.at("name").get<std::string>();
  }
  if (!j.contains("regime") || !j.at("regime").is_string())
    throw InputError(what + ": key 'regime' must be one of \"TS\", \"TP\", \"DT\"");
  try {
    d.regime = regime_from_string(j.at("regime").get<std::string>());
  } catch (const InputError&) {
    throw InputError(what + ": key 'regime' must be one of \"TS\", \"TP\", \"DT\"");
  }

  if (j.contains("times")) {
    if (j.contains("n") || j.contains("delta"))
      throw InputError(what + ": key 'times' conflicts with 'n'/'delta'");
    d.times = get_numbers(j, "times", what);
  } else if (j.contains("n") || j.contains("delta")) {
    if (!j.contains("n")) throw InputError(what + ": key 'delta' needs 'n'");
    if (!j.contains("delta")) throw InputError(what + ": key 'n' needs 'delta'");
    const int n = get_int(j, "n", what);
    const double delta = get_number(j, "delta", what);
    if (n < 1) throw InputError(what + ": key 'n' must be >= 1");
    if (!(delta > 0.0)) throw InputError(what + ": key 'delta' must be > 0");
    for (int i = 1; i <= n; ++i) d.times.push_back(i * delta);
  } else if (need_times) {
    throw InputError(what + ": missing key 'times'");
  }

  if (!j.contains("observed") || !j.at("observed").is_array())
    throw InputError(what + ": key 'observed' must be an array of species names");
  for (const auto& s : j.at("observed")) {
    if (!s.is_string()) throw InputError(what + ": key 'observed' must be an array of species names");
    const int idx = net.species_index(s.get<std::string>());
    if (idx < 0) throw InputError(what + ": key 'observed': unknown species '" + s.get<std::string>() + "'");
    d.observed.push_back(idx);
  }
  d.sigma_eps2 = j.contains("sigma_eps2") ? get_number(j, "sigma_eps2", what) : 0.0;
  if (!(d.sigma_eps2 >= 0.0)) throw InputError(what + ": key 'sigma_eps2' must be >= 0");
  d.init = j.contains("init") ? init_from_json(j.at("init"), net, what) : InitialCondition::stationary();
  return d;
}

}  // namespace

Vector parse_params(const std::string& text, const ReactionNetwork& net) {
  const json j = parse_json(text, "params");
  require_object(j, "params");
  Vector theta = Vector::Constant(net.num_params(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [key, value] : j.items()) {
    const int idx = net.param_index(key);
    if (idx < 0) throw InputError("params: unknown parameter '" + key + "'");
    if (!value.is_number()) throw InputError("params: key '" + key + "' must be a number");
    theta[idx] = value.get<double>();
    if (!std::isfinite(theta[idx])) throw InputError("params: key '" + key + "' must be finite");
  }
  for (int l = 0; l < net.num_params(); ++l)
    if (std::isnan(theta[l]))
      throw InputError("params: missing parameter '" + net.params()[static_cast<std::size_t>(l)] + "'");
  return theta;
}

ObservationDesign design_from_json(const json& j, const ReactionNetwork& net, const std::string& name) {
  ObservationDesign d = design_fields(j, net, name, true);
  d.validate(net);
  return d;
}

ObservationDesign parse_design(const std::string& text, const ReactionNetwork& net,
                               const std::string& name) {
  return design_from_json(parse_json(text, "design '" + name + "'"), net, name);
}

SweepSpec parse_sweep(const std::string& text, const ReactionNetwork& net) {
  const json j = parse_json(text, "sweep");
  require_object(j, "sweep");
  reject_unknown(j, {"design", "n", "deltas", "delta_grid", "criteria"}, "sweep");
  SweepSpec spec;
  if (!j.contains("design")) throw InputError("sweep: missing key 'design'");
  spec.base = design_fields(j.at("design"), net, "sweep", false);
  if (!spec.base.times.empty()) throw InputError("sweep: key 'design' must not fix 'times'");
  if (j.contains("n")) spec.n = get_int(j, "n", "sweep");
  if (j.contains("deltas") == j.contains("delta_grid"))
    throw InputError("sweep: give exactly one of 'deltas' or 'delta_grid'");
  if (j.contains("deltas")) {
    spec.deltas = get_numbers(j, "deltas", "sweep");
  } else {
    const json& g = j.at("delta_grid");
    const std::string w = "sweep: key 'delta_grid'";
    require_object(g, w);
    reject_unknown(g, {"from", "to", "count"}, w);
    for (const char* k : {"from", "to", "count"})
      if (!g.contains(k)) throw InputError(w + ": missing key '" + k + "'");
    const int count = get_int(g, "count", w);
    if (count < 1) throw InputError("sweep: delta grid is empty");
    const double from = get_number(g, "from", w), to = get_number(g, "to", w);
    if (!(from > 0.0) || !(to > 0.0)) throw InputError(w + ": bounds must be > 0");
    spec.deltas = logspace(from, to, count);
  }
  if (j.contains("criteria")) {
    const json& c = j.at("criteria");
    if (!c.is_array()) throw InputError("sweep: key 'criteria' must be an array of names");
    spec.criteria.clear();
    for (const auto& x : c) {
      if (!x.is_string()) throw InputError("sweep: key 'criteria' must be an array of names");
      spec.criteria.push_back(criterion_from_string(x.get<std::string>()));
    }
  }
  spec.validate();
  spec.design_at(spec.deltas.front()).validate(net);
  return spec;
}

// -- outputs -----------------------------------------------------------------

json matrix_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(number(m(r, c)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

namespace {

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

}  // namespace

json to_json(const FimReport& r) {
  json j;
  j["params"] = r.param_names;
  j["scale"] = to_string(r.scale);
  j["theta"] = vector_json(r.theta);
  j["fim"] = matrix_json(r.fim);
  j["eigenvalues"] = vector_json(r.eig.values);
  j["eigenvectors"] = matrix_json(r.eig.vectors);
  j["min_raw_eigenvalue"] = number(r.eig.min_raw);
  j["sensitivity_S2"] = vector_json(r.sens.S2);
  j["sensitivity_T"] = r.sens.T_defined ? vector_json(r.sens.T) : json(nullptr);
  j["rank"] = r.rank;
  j["rank_tol"] = r.rank_tol;
  j["cramer_rao"] = r.cr.singular ? json("singular") : vector_json(r.cr.bounds);
  j["log_det"] = number(r.opt.log_det);
  j["trace_inverse"] = number(r.opt.trace_inverse);
  j["singular"] = r.opt.singular;
  j["warnings"] = r.warnings;
  return j;
}

std::string summary_text(const FimReport& r) {
  std::ostringstream out;
  const auto L = r.param_names.size();
  out << "parameters: " << L << " (" << to_string(r.scale) << " scale)\n";
  out << "identifiability rank: " << r.rank << " of " << L << " (tau = " << format_double(r.rank_tol)
      << ")\n";
  out << "log_det: " << format_double(r.opt.log_det) << "\n";
  out << "trace_inverse: " << format_double(r.opt.trace_inverse) << "\n";
  out << "\n";
  out << std::left << std::setw(12) << "param" << std::setw(26) << "theta" << std::setw(26)
      << "cramer_rao" << "T_j\n";
  for (std::size_t k = 0; k < L; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out << std::setw(12) << r.param_names[k] << std::setw(26) << format_double(r.theta[i])
        << std::setw(26) << (r.cr.singular ? std::string("singular") : format_double(r.cr.bounds[i]))
        << (r.sens.T_defined ? format_double(r.sens.T[i]) : std::string("undefined")) << "\n";
  }
  out << "\neigenvalues:";
  for (Eigen::Index i = 0; i < r.eig.values.size(); ++i) out << " " << format_double(r.eig.values[i]);
  out << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string ellipse_csv(const NeutralEllipse& e, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << names[static_cast<std::size_t>(e.j)] << "," << names[static_cast<std::size_t>(e.k)] << "\n";
  for (const auto& p : e.points) out << format_double(p[0]) << "," << format_double(p[1]) << "\n";
  return out.str();
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "delta,criterion,value,status\n";
  for (const auto& row : r.rows) {
    std::string status = row.status;
    for (char& c : status)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    out << format_double(row.delta) << "," << to_string(row.criterion) << ","
        << format_double(row.value) << "," << status << "\n";
  }
  return out.str();
}

json to_json(const SweepResult& r) {
  json opt = json::array();
  for (const auto& o : r.optima) {
    json j{{"criterion", to_string(o.criterion)}, {"found", o.found}};
    if (o.found) {
      j["index"] = o.index;
      j["delta"] = o.delta;
      j["value"] = number(o.value);
      j["interior"] = o.interior;
      j["refined_delta"] = o.refined_delta;
      j["refined_value"] = number(o.refined_value);
    }
    opt.push_back(j);
  }
  return {{"optima", opt}};
}

json to_json(const DesignComparison& c) {
  json j;
  j["designs"] = c.names;
  json reports = json::object();
  for (std::size_t d = 0; d < c.names.size(); ++d) reports[c.names[d]] = to_json(c.reports[d]);
  j["reports"] = reports;
  j["eigenvalues_normalized_per_design"] = matrix_json(c.eig_per_design);
  j["eigenvalues_normalized_global"] = matrix_json(c.eig_global);
  j["warnings"] = c.warnings;
  return j;
}

json to_json(const SsaSummary& s, const std::vector<std::string>& species) {
  json j;
  j["trajectories"] = s.count;
  j["species"] = species;
  j["times"] = s.times;
  json mean = json::array(), mean_se = json::array();
  for (std::size_t a = 0; a < s.times.size(); ++a) {
    mean.push_back(vector_json(s.mean[a]));
    mean_se.push_back(vector_json(s.mean_se[a]));
  }
  j["mean"] = mean;
  j["mean_se"] = mean_se;
  json cov = json::array(), cov_se = json::array();
  for (std::size_t a = 0; a < s.times.size(); ++a) {
    json row = json::array(), row_se = json::array();
    for (std::size_t b = 0; b < s.times.size(); ++b) {
      row.push_back(matrix_json(s.cov[a][b]));
      row_se.push_back(matrix_json(s.cov_se[a][b]));
    }
    cov.push_back(row);
    cov_se.push_back(row_se);
  }
  j["cov"] = cov;
  j["cov_se"] = cov_se;
  return j;
}

std::string ssa_raw_csv(const SsaEnsemble& e, const std::vector<std::string>& species) {
  std::ostringstream out;
  out << "trajectory,time";
  for (const auto& s : species) out << "," << s;
  out << "\n";
  for (int r = 0; r < e.count; ++r)
    for (std::size_t a = 0; a < e.times.size(); ++a) {
      out << r << "," << format_double(e.times[a]);
      for (int i = 0; i < e.num_species; ++i) out << "," << e.at(r, static_cast<int>(a), i);
      out << "\n";
    }
  return out.str();
}

std::string trajectory_csv(const LnaTrajectory& traj, const std::vector<std::string>& species) {
  std::ostringstream out;
  const int N = static_cast<int>(species.size());
  out << "t";
  for (const auto& s : species) out << ",phi_" << s;
  for (int i = 0; i < N; ++i)
    for (int k = i; k < N; ++k)
      out << ",V_" << species[static_cast<std::size_t>(i)] << "_" << species[static_cast<std::size_t>(k)];
  out << "\n";
  for (std::size_t a = 0; a < traj.size(); ++a) {
    out << format_double(traj.times[a]);
    for (int i = 0; i < N; ++i) out << "," << format_double(traj.phi[a][i]);
    for (int i = 0; i < N; ++i)
      for (int k = i; k < N; ++k) out << "," << format_double(traj.V[a](i, k));
    out << "\n";
  }
  return out.str();
}

void RunManifest::add_input(const std::string& path, const std::string& content) {
  input_digests[path] = sha256_hex(content);
}

void RunManifest::warn(const std::string& w) {
  for (const auto& x : warnings)
    if (x == w) return;
  warnings.push_back(w);
}

json RunManifest::to_json() const {
  json j;
  j["tool"] = "lnafim";
  j["version"] = kVersion;
  j["command"] = command;
  j["inputs"] = input_digests;
  json params = json::object();
  for (std::size_t k = 0; k < param_names.size(); ++k)
    params[param_names[k]] = number(theta[static_cast<Eigen::Index>(k)]);
  j["parameters"] = params;
  j["solver"] = {{"method", "dormand_prince_45"},
                 {"rtol", solver.rtol},
                 {"atol", solver.atol},
                 {"max_steps", solver.max_steps}};
  j["scale"] = lnafim::to_string(scale);
  j["regimes"] = regimes;
  j["jitter"] = jitter;
  if (has_seed) j["seed"] = seed;
  j["outputs"] = outputs;
  j["warnings"] = warnings;
  j["started_at"] = started_at;
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

}  // namespace lnafim::io
