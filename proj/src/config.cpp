#include "poleflow/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace poleflow {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown field '" + where + "." + it.key() + "'");
}

const json& need(const json& j, const std::string& where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing field '" + where + "." + key + "'");
  return *it;
}

double number(const json& j, const std::string& name) {
  if (!j.is_number()) throw ConfigError("field '" + name + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("field '" + name + "' must be finite");
  return v;
}

int integer(const json& j, const std::string& name) {
  if (!j.is_number_integer()) throw ConfigError("field '" + name + "' must be an integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& name) {
  if (!j.is_string()) throw ConfigError("field '" + name + "' must be a string");
  return j.get<std::string>();
}

template <class T>
void opt_number(const json& j, const std::string& where, const char* key, T& dst) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_integral_v<T>)
    dst = integer(*it, where + "." + key);
  else
    dst = number(*it, where + "." + key);
}

Potential parse_potential(const json& j) {
  only_keys(j, "potential", {"pieces"});
  const json& ps = need(j, "potential", "pieces");
  if (!ps.is_array() || ps.empty()) throw ConfigError("'potential.pieces' must be a non-empty list");
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::string w = "potential.pieces[" + std::to_string(i) + "]";
    only_keys(ps[i], w, {"from", "to", "value"});
    pieces.push_back({number(need(ps[i], w, "from"), w + ".from"),
                      number(need(ps[i], w, "to"), w + ".to"),
                      number(need(ps[i], w, "value"), w + ".value")});
  }
  try {
    return from_pieces(pieces);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("'potential.pieces': ") + e.what());
  }
}

Window parse_window(const json& j) {
  only_keys(j, "window", {"re_min", "re_max", "im_min", "im_max"});
  Window w{number(need(j, "window", "re_min"), "window.re_min"),
           number(need(j, "window", "re_max"), "window.re_max"),
           number(need(j, "window", "im_min"), "window.im_min"),
           number(need(j, "window", "im_max"), "window.im_max")};
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("'window': ") + e.what());
  }
  return w;
}

SweepConfig parse_sweep(const json& j) {
  only_keys(j, "sweep", {"target", "from", "to", "constraint"});
  SweepConfig s;
  const std::string target = text(need(j, "sweep", "target"), "sweep.target");
  const auto colon = target.find(':');
  try {
    s.parameter.target = sweep_target_from_string(target.substr(0, colon));
    if (colon != std::string::npos) {
      if (s.parameter.target == SweepTarget::half_width)
        throw ConfigError("'sweep.target': half_width takes no piece index");
      s.parameter.piece = std::stoul(target.substr(colon + 1));
    } else if (s.parameter.target != SweepTarget::half_width) {
      throw ConfigError("'sweep.target' needs a piece index, e.g. \"depth:0\"");
    }
  } catch (const std::logic_error&) {
    throw ConfigError("'sweep.target' must be value:i, depth:i, width:i or half_width");
  }
  s.from = number(need(j, "sweep", "from"), "sweep.from");
  s.to = number(need(j, "sweep", "to"), "sweep.to");
  const std::string c = j.contains("constraint") ? text(j["constraint"], "sweep.constraint") : "none";
  if (c == "none") {
    s.parameter.scaling_exponent = 0.0;
  } else if (c == "fixed_area") {
    s.parameter.scaling_exponent = 1.0;
  } else if (c.rfind("power:", 0) == 0) {
    try {
      s.parameter.scaling_exponent = std::stod(c.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("'sweep.constraint': bad exponent in '" + c + "'");
    }
  } else {
    throw ConfigError("'sweep.constraint' must be none, fixed_area or power:<p>");
  }
  return s;
}

SpectrumConfig parse_spectrum(const json& j) {
  only_keys(j, "spectrum", {"k_min", "k_max", "n"});
  SpectrumConfig s{number(need(j, "spectrum", "k_min"), "spectrum.k_min"),
                   number(need(j, "spectrum", "k_max"), "spectrum.k_max"),
                   integer(need(j, "spectrum", "n"), "spectrum.n")};
  if (!(s.k_min > 0.0)) throw ConfigError("'spectrum.k_min' must be positive");
  if (!(s.k_max > s.k_min)) throw ConfigError("'spectrum.k_max' must exceed spectrum.k_min");
  if (s.n < 2) throw ConfigError("'spectrum.n' must be at least 2");
  return s;
}

void parse_continuation(const json& j, ContinuationOptions& o) {
  only_keys(j, "continuation",
            {"max_step_dist", "census_interval", "axis_tol", "coalescence_dist", "param_tol",
             "dp_initial", "dp_max", "dp_min", "success_streak"});
  const std::string w = "continuation";
  opt_number(j, w, "max_step_dist", o.max_step_dist);
  opt_number(j, w, "census_interval", o.census_interval);
  opt_number(j, w, "axis_tol", o.axis_tol);
  opt_number(j, w, "coalescence_dist", o.coalescence_dist);
  opt_number(j, w, "param_tol", o.param_tol);
  opt_number(j, w, "dp_initial", o.dp_initial);
  opt_number(j, w, "dp_max", o.dp_max);
  opt_number(j, w, "dp_min", o.dp_min);
  opt_number(j, w, "success_streak", o.success_streak);
}

void parse_tolerances(const json& j, RootOptions& r) {
  only_keys(j, "tolerances",
            {"polish_tol", "residual_tol", "max_newton_iter", "cluster_diameter", "dilation",
             "max_dilations", "quad_tol", "winding_tol", "reject_tol", "max_edge_evals",
             "boundary_tol"});
  const std::string w = "tolerances";
  opt_number(j, w, "polish_tol", r.polish_tol);
  opt_number(j, w, "residual_tol", r.residual_tol);
  opt_number(j, w, "max_newton_iter", r.max_newton_iter);
  opt_number(j, w, "cluster_diameter", r.cluster_diameter);
  opt_number(j, w, "dilation", r.dilation);
  opt_number(j, w, "max_dilations", r.max_dilations);
  opt_number(j, w, "quad_tol", r.quad_tol);
  opt_number(j, w, "winding_tol", r.winding_tol);
  opt_number(j, w, "reject_tol", r.reject_tol);
  opt_number(j, w, "max_edge_evals", r.max_edge_evals);
  opt_number(j, w, "boundary_tol", r.boundary_tol);
}

std::filesystem::path out_path(const json& j, const char* key,
                               const std::filesystem::path& base) {
  const std::filesystem::path p = text(j[key], std::string("output.") + key);
  if (p.empty()) throw ConfigError(std::string("'output.") + key + "' must not be empty");
  return p.is_absolute() ? p : base / p;
}

}  // namespace

PotentialFamily RunConfig::family() const {
  if (!sweep) throw ConfigError("missing field 'sweep'");
  try {
    return PotentialFamily(potential, sweep->parameter);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("'sweep': ") + e.what());
  }
}

RunConfig parse_config(const std::string& src, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(src, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"potential", "window", "sweep", "continuation", "tolerances", "spectrum", "output"});
  RunConfig c;
  c.potential = parse_potential(need(j, "config", "potential"));
  if (j.contains("window")) c.window = parse_window(j["window"]);
  if (j.contains("sweep")) c.sweep = parse_sweep(j["sweep"]);
  if (j.contains("spectrum")) c.spectrum = parse_spectrum(j["spectrum"]);
  if (j.contains("continuation")) parse_continuation(j["continuation"], c.continuation);
  if (j.contains("tolerances")) parse_tolerances(j["tolerances"], c.continuation.roots);
  c.output.census = base_dir / c.output.census;
  c.output.flow = base_dir / c.output.flow;
  c.output.spectrum = base_dir / c.output.spectrum;
  if (j.contains("output")) {
    const json& o = j["output"];
    only_keys(o, "output", {"census", "flow", "spectrum", "branch_points"});
    if (o.contains("census")) c.output.census = out_path(o, "census", base_dir);
    if (o.contains("flow")) c.output.flow = out_path(o, "flow", base_dir);
    if (o.contains("spectrum")) c.output.spectrum = out_path(o, "spectrum", base_dir);
    if (o.contains("branch_points")) c.output.branch_points = out_path(o, "branch_points", base_dir);
  }
  try {
    c.continuation.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("'continuation'/'tolerances': ") + e.what());
  }
  if (c.sweep) c.family();
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

int thread_cap() {
  const char* env = std::getenv("POLEFLOW_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) return 1;
  return static_cast<int>(std::min(n, 256L));
}

}  // namespace poleflow
