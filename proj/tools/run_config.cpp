#include "run_config.hpp"

#include <cmath>
#include <sstream>

namespace roughflow::cli {

namespace {

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vec_from(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("field '" + field + "': expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("field '" + field + "[" + std::to_string(i) + "]': expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "': wrong type");
  }
}

}  // namespace

double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    if (s.rfind("2^", 0) == 0) {
      const int e = std::stoi(s.substr(2), &used);
      if (used + 2 != s.size()) throw std::invalid_argument(s);
      return std::ldexp(1.0, e);
    }
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(what + ": '" + s + "' is not a number (use e.g. 0.001 or 2^-10)");
  }
}

Vec parse_vec(const std::string& s, const std::string& what) {
  std::vector<double> xs;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) xs.push_back(parse_real(cell, what));
  if (xs.empty()) throw ConfigError(what + ": empty vector");
  return Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Json to_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  Json sys;
  if (c.polynomial) sys["polynomial"] = roughflow::to_json(*c.polynomial);
  else sys["id"] = c.system_id;
  sys["params"] = Json(c.params);
  j["system"] = sys;
  j["driver_mode"] = c.driver_mode;
  j["driver"] = roughflow::to_json(c.driver);
  j["refine"] = c.refine;
  j["solver"] = c.solver;
  j["x0"] = vec_json(c.x0);
  j["T"] = c.T;
  j["control"] = Json{{"displacement_cap", c.control.displacement_cap},
                      {"step_floor", c.control.step_floor},
                      {"blowup_threshold", c.control.blowup_threshold},
                      {"max_substeps", c.control.max_substeps},
                      {"radii", c.control.radii}};
  if (c.growth) {
    j["growth"] = roughflow::to_json(*c.growth);
    j["R"] = c.R;
    j["levels"] = c.levels;
  }
  if (!c.seeds.empty()) j["seeds"] = c.seeds;
  if (!c.starts.empty()) {
    Json s = Json::array();
    for (const auto& v : c.starts) s.push_back(vec_json(v));
    j["starts"] = s;
    j["threads"] = c.threads;
  }
  if (!c.path_file.empty()) j["path_file"] = c.path_file;
  if (!c.holder.empty()) j["holder"] = c.holder;
  if (!c.pvar.empty()) j["pvar"] = c.pvar;
  if (c.exponent) j["exponent"] = true;
  j["out"] = c.out;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c;
  c.command = get_or<std::string>(j, "command", "");
  if (!j.contains("system") || !j["system"].is_object()) throw ConfigError("field 'system': missing");
  const Json& s = j["system"];
  if (s.contains("polynomial")) c.polynomial = polynomial_spec_from_json(s["polynomial"]);
  else c.system_id = get_or<std::string>(s, "id", "");
  if (s.contains("params")) {
    if (!s["params"].is_object()) throw ConfigError("field 'system.params': expected an object");
    for (auto it = s["params"].begin(); it != s["params"].end(); ++it) {
      if (!it.value().is_number()) throw ConfigError("field 'system.params." + it.key() + "': expected a number");
      c.params[it.key()] = it.value().get<double>();
    }
  }
  c.driver_mode = get_or<std::string>(j, "driver_mode", "brownian");
  if (!j.contains("driver")) throw ConfigError("field 'driver': missing");
  c.driver = driver_spec_from_json(j["driver"]);
  c.refine = get_or<int>(j, "refine", 16);
  c.solver = get_or<std::string>(j, "solver", "");
  if (!j.contains("x0")) throw ConfigError("field 'x0': missing");
  c.x0 = vec_from(j["x0"], "x0");
  c.T = get_or<double>(j, "T", 1.0);
  if (j.contains("control")) {
    const Json& k = j["control"];
    c.control.displacement_cap = get_or<double>(k, "displacement_cap", c.control.displacement_cap);
    c.control.step_floor = get_or<double>(k, "step_floor", c.control.step_floor);
    c.control.blowup_threshold = get_or<double>(k, "blowup_threshold", c.control.blowup_threshold);
    c.control.max_substeps = get_or<std::size_t>(k, "max_substeps", c.control.max_substeps);
    c.control.radii = get_or<std::vector<double>>(k, "radii", {});
  }
  if (j.contains("growth")) c.growth = growth_spec_from_json(j["growth"]);
  c.R = get_or<double>(j, "R", 0.0);
  c.levels = get_or<int>(j, "levels", 64);
  c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {});
  if (j.contains("starts")) {
    if (!j["starts"].is_array()) throw ConfigError("field 'starts': expected an array");
    for (std::size_t i = 0; i < j["starts"].size(); ++i)
      c.starts.push_back(vec_from(j["starts"][i], "starts[" + std::to_string(i) + "]"));
  }
  c.threads = get_or<unsigned>(j, "threads", 0);
  c.path_file = get_or<std::string>(j, "path_file", "");
  c.holder = get_or<std::vector<double>>(j, "holder", {});
  c.pvar = get_or<std::vector<double>>(j, "pvar", {});
  c.exponent = get_or<bool>(j, "exponent", false);
  c.out = get_or<std::string>(j, "out", ".");
  return c;
}

VectorFieldSystem build_system(const RunConfig& c) {
  if (c.polynomial) return polynomial_system(*c.polynomial, "polynomial");
  try {
    return registry(c.system_id, c.params).system;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field 'system': ") + e.what());
  }
}

std::optional<GalleryEntry> gallery_entry(const RunConfig& c) {
  if (c.polynomial) return std::nullopt;
  return registry(c.system_id, c.params);
}

BuiltDriver build_driver(const RunConfig& c, const VectorFieldSystem& sys) {
  const bool rough = c.solver == "rde";
  DriverSpec spec = c.driver;
  if (spec.dim != sys.m)
    throw ConfigError("field 'driver.dim': system needs a " + std::to_string(sys.m) + "-dimensional driver");
  if (c.driver_mode == "pure-quadratic") {
    if (!rough) throw ConfigError("driver 'pure-quadratic' needs the rde solver");
    return pure_quadratic_lift(spec.horizon, spec.mesh, sys.m);
  }
  if (c.driver_mode == "none") {
    const auto grid = uniform_grid(spec.horizon, spec.mesh);
    SampledPath zero(grid, Mat::Zero(sys.m, static_cast<Eigen::Index>(grid.size())));
    if (rough) return canonical_lift(zero);
    return zero;
  }
  if (c.driver_mode == "brownian" && rough) return ito_lift(spec, c.refine);
  SampledPath p = generate(spec);
  if (rough) return canonical_lift(p, 0.45);
  return p;
}

Trajectory solve(const RunConfig& c, const VectorFieldSystem& sys, const BuiltDriver& drv, const StepControl& ctrl) {
  if (c.solver == "rde") return rde_solve(sys, std::get<RoughPath>(drv), c.x0, c.T, ctrl);
  const auto& p = std::get<SampledPath>(drv);
  if (c.solver == "ode") return ode_solve(sys, p, c.x0, c.T, ctrl);
  if (c.solver == "young") return young_solve(sys, p, c.x0, c.T, ctrl);
  if (c.solver == "localize") {
    std::vector<double> radii = ctrl.radii;
    if (radii.empty())
      for (int k = 1; k <= 40; ++k) radii.push_back(std::ldexp(1.0, k));
    StepControl local = ctrl;
    local.radii.clear();
    return localize_solve(sys, p, c.x0, radii, c.T, local);
  }
  throw ConfigError("field 'solver': unknown solver '" + c.solver + "' (ode, young, rde, localize)");
}

}  // namespace roughflow::cli
