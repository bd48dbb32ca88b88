#include "roughflow/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace roughflow {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(std::string s, const std::string& where) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  double v = 0.0;
  const char* first = s.data() + b;
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw ConfigError(where + ": '" + s + "' is not a number");
  return v;
}

// Field readers with JSON-path diagnostics.
void expect_keys(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("field '" + path + "': expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("field '" + path + (path.empty() ? "" : ".") + it.key() + "': unknown field");
}

std::string sub(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double num(const Json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("field '" + sub(path, key) + "': expected a number");
  return j[key].get<double>();
}

double num_required(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError("field '" + sub(path, key) + "': missing");
  return num(j, key, path, 0.0);
}

int integer(const Json& j, const std::string& key, const std::string& path, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError("field '" + sub(path, key) + "': expected an integer");
  return j[key].get<int>();
}

std::string str(const Json& j, const std::string& key, const std::string& path, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError("field '" + sub(path, key) + "': expected a string");
  return j[key].get<std::string>();
}

Vec vec(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("field '" + path + "': expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("field '" + path + "[" + std::to_string(i) + "]': expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat mat(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError("field '" + path + "': expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    Vec row = vec(j[r], path + "[" + std::to_string(r) + "]");
    if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError("field '" + path + "': ragged rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json mat_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

Json opt_num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

const char* kind_name(DriverKind k) {
  switch (k) {
    case DriverKind::brownian: return "brownian";
    case DriverKind::fbm: return "fbm";
    case DriverKind::levy: return "levy";
    case DriverKind::deterministic_file: return "file";
  }
  return "brownian";
}

const char* jump_name(JumpSampler::Kind k) {
  switch (k) {
    case JumpSampler::Kind::uniform_ball: return "uniform-ball";
    case JumpSampler::Kind::truncated_gaussian: return "truncated-gaussian";
    case JumpSampler::Kind::fixed: return "fixed";
  }
  return "uniform-ball";
}

}  // namespace

void write_path_csv(const SampledPath& path, const std::string& file, const std::string& prefix) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << "t";
  for (int k = 0; k < path.dim(); ++k) out << ',' << prefix << (k + 1);
  out << '\n';
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << fmt(path.time(i));
    for (int k = 0; k < path.dim(); ++k) out << ',' << fmt(path.value(i)(k));
    out << '\n';
  }
}

SampledPath read_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(file + ":1: empty file");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t") throw ConfigError(file + ":1: header must be t,x1,...,xd");
  const std::size_t d = header.size() - 1;
  std::vector<double> times;
  std::vector<Vec> vals;
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    const std::string where = file + ":" + std::to_string(ln);
    if (cells.size() != d + 1)
      throw ConfigError(where + ": expected " + std::to_string(d + 1) + " columns, found " + std::to_string(cells.size()));
    const double t = parse_double(cells[0], where);
    if (!times.empty() && !(t > times.back())) throw ConfigError(where + ": times must be strictly increasing");
    Vec v(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) v(static_cast<Eigen::Index>(k)) = parse_double(cells[k + 1], where);
    times.push_back(t);
    vals.push_back(v);
  }
  if (times.size() < 2) throw ConfigError(file + ": need at least two samples");
  return SampledPath(std::move(times), vals);
}

Json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

void write_json_file(const Json& j, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << j.dump(2) << '\n';
}

Json to_json(const DriverSpec& s) {
  Json j;
  j["kind"] = kind_name(s.kind);
  j["dim"] = s.dim;
  j["horizon"] = s.horizon;
  j["mesh"] = s.mesh;
  j["seed"] = s.seed;
  if (s.kind == DriverKind::fbm) {
    j["hurst"] = s.hurst;
    j["jitter"] = s.jitter;
  }
  if (s.kind == DriverKind::levy) {
    Json l;
    l["drift"] = vec_json(s.levy.drift);
    l["covariance"] = mat_json(s.levy.covariance);
    l["intensity"] = s.levy.intensity;
    Json jj;
    jj["kind"] = jump_name(s.levy.jumps.kind);
    jj["radius"] = s.levy.jumps.radius;
    jj["scale"] = s.levy.jumps.scale;
    jj["floor"] = s.levy.jumps.floor;
    if (s.levy.jumps.kind == JumpSampler::Kind::fixed) {
      jj["times"] = s.levy.jumps.times;
      Json sizes = Json::array();
      for (const auto& v : s.levy.jumps.sizes) sizes.push_back(vec_json(v));
      jj["sizes"] = sizes;
    }
    l["jumps"] = jj;
    j["levy"] = l;
  }
  if (s.kind == DriverKind::deterministic_file) j["file"] = s.file;
  return j;
}

DriverSpec driver_spec_from_json(const Json& j) {
  const std::string p = "driver";
  expect_keys(j, p, {"kind", "dim", "horizon", "mesh", "seed", "hurst", "jitter", "levy", "file"});
  DriverSpec s;
  const std::string kind = str(j, "kind", p, "brownian");
  if (kind == "brownian") s.kind = DriverKind::brownian;
  else if (kind == "fbm") s.kind = DriverKind::fbm;
  else if (kind == "levy") s.kind = DriverKind::levy;
  else if (kind == "file") s.kind = DriverKind::deterministic_file;
  else throw ConfigError("field 'driver.kind': unknown driver '" + kind + "' (brownian, fbm, levy, file)");
  s.dim = integer(j, "dim", p, 1);
  s.horizon = num(j, "horizon", p, 1.0);
  s.mesh = num(j, "mesh", p, s.mesh);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("field 'driver.seed': expected a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("hurst")) {
    if (j["hurst"].is_number()) s.hurst = {j["hurst"].get<double>()};
    else {
      Vec h = vec(j["hurst"], "driver.hurst");
      s.hurst.assign(h.data(), h.data() + h.size());
    }
  }
  s.jitter = num(j, "jitter", p, 0.0);
  if (j.contains("levy")) {
    const Json& l = j["levy"];
    const std::string lp = "driver.levy";
    expect_keys(l, lp, {"drift", "covariance", "intensity", "jumps"});
    s.levy.drift = l.contains("drift") ? vec(l["drift"], lp + ".drift") : Vec::Zero(s.dim);
    s.levy.covariance = l.contains("covariance") ? mat(l["covariance"], lp + ".covariance") : Mat::Identity(s.dim, s.dim);
    s.levy.intensity = num(l, "intensity", lp, 0.0);
    if (l.contains("jumps")) {
      const Json& q = l["jumps"];
      const std::string qp = lp + ".jumps";
      expect_keys(q, qp, {"kind", "radius", "scale", "floor", "times", "sizes"});
      const std::string k = str(q, "kind", qp, "uniform-ball");
      if (k == "uniform-ball") s.levy.jumps.kind = JumpSampler::Kind::uniform_ball;
      else if (k == "truncated-gaussian") s.levy.jumps.kind = JumpSampler::Kind::truncated_gaussian;
      else if (k == "fixed") s.levy.jumps.kind = JumpSampler::Kind::fixed;
      else throw ConfigError("field '" + qp + ".kind': unknown jump law '" + k + "'");
      s.levy.jumps.radius = num(q, "radius", qp, 1.0);
      s.levy.jumps.scale = num(q, "scale", qp, 1.0);
      s.levy.jumps.floor = num(q, "floor", qp, 0.0);
      if (q.contains("times")) {
        Vec t = vec(q["times"], qp + ".times");
        s.levy.jumps.times.assign(t.data(), t.data() + t.size());
      }
      if (q.contains("sizes")) {
        if (!q["sizes"].is_array()) throw ConfigError("field '" + qp + ".sizes': expected an array");
        for (std::size_t i = 0; i < q["sizes"].size(); ++i)
          s.levy.jumps.sizes.push_back(vec(q["sizes"][i], qp + ".sizes[" + std::to_string(i) + "]"));
      }
    }
  } else if (s.kind == DriverKind::levy) {
    s.levy.drift = Vec::Zero(s.dim);
    s.levy.covariance = Mat::Identity(s.dim, s.dim);
  }
  s.file = str(j, "file", p, "");
  if (s.kind == DriverKind::deterministic_file && s.file.empty()) throw ConfigError("field 'driver.file': missing");
  if (s.dim < 1) throw ConfigError("field 'driver.dim': must be >= 1");
  if (!(s.horizon > 0)) throw ConfigError("field 'driver.horizon': must be positive");
  if (!(s.mesh > 0)) throw ConfigError("field 'driver.mesh': must be positive");
  return s;
}

Json to_json(const Control& f) {
  return Json{{"kind", f.kind}, {"c0", f.c0}, {"c1", f.c1}, {"q", f.q}};
}

Control control_from_json(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "1+s" || s == "affine") return Control::one_plus_s();
    if (s == "log-affine") return Control::log_affine();
    if (s == "identity") return Control::identity();
    throw ConfigError("field 'growth.f': unknown control '" + s + "'");
  }
  const std::string p = "growth.f";
  expect_keys(j, p, {"kind", "c0", "c1", "q"});
  Control f;
  f.kind = str(j, "kind", p, "affine");
  f.c0 = num(j, "c0", p, f.c0);
  f.c1 = num(j, "c1", p, f.c1);
  f.q = num(j, "q", p, f.q);
  try {
    (void)f(1.0);
  } catch (const std::exception& e) {
    throw ConfigError("field 'growth.f.kind': " + std::string(e.what()));
  }
  return f;
}

Json to_json(const GrowthSpec& s) {
  return Json{{"f", to_json(s.f)}, {"beta", s.beta},   {"kappa", s.kappa}, {"theta", s.theta},
              {"alpha", s.alpha},  {"a", s.a},         {"b_a_T", s.b_a_T}};
}

GrowthSpec growth_spec_from_json(const Json& j) {
  const std::string p = "growth";
  expect_keys(j, p, {"f", "beta", "kappa", "theta", "alpha", "a", "b_a_T"});
  GrowthSpec s;
  if (j.contains("f")) s.f = control_from_json(j["f"]);
  s.beta = num(j, "beta", p, s.beta);
  s.kappa = num(j, "kappa", p, s.kappa);
  s.theta = num(j, "theta", p, s.theta);
  s.alpha = num(j, "alpha", p, s.alpha);
  s.a = num(j, "a", p, s.a);
  s.b_a_T = num(j, "b_a_T", p, s.b_a_T);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("growth: " + std::string(e.what()));
  }
  return s;
}

namespace {

Polynomial poly_from_json(const Json& j, const std::string& path, int d) {
  if (!j.is_array()) throw ConfigError("field '" + path + "': expected an array of monomials");
  Polynomial p;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string mp = path + "[" + std::to_string(i) + "]";
    expect_keys(j[i], mp, {"coef", "powers"});
    Monomial m;
    m.coef = num_required(j[i], "coef", mp);
    if (!j[i].contains("powers") || !j[i]["powers"].is_array())
      throw ConfigError("field '" + mp + ".powers': expected an array of integers");
    for (const auto& e : j[i]["powers"]) {
      if (!e.is_number_integer() || e.get<int>() < 0)
        throw ConfigError("field '" + mp + ".powers': expected non-negative integers");
      m.powers.push_back(e.get<int>());
    }
    if (static_cast<int>(m.powers.size()) != d)
      throw ConfigError("field '" + mp + ".powers': expected " + std::to_string(d) + " exponents");
    p.push_back(m);
  }
  return p;
}

Json poly_json(const Polynomial& p) {
  Json a = Json::array();
  for (const auto& m : p) a.push_back(Json{{"coef", m.coef}, {"powers", m.powers}});
  return a;
}

}  // namespace

PolynomialSystemSpec polynomial_spec_from_json(const Json& j) {
  const std::string p = "system";
  expect_keys(j, p, {"d", "m", "drift", "sigma", "name"});
  PolynomialSystemSpec s;
  s.d = integer(j, "d", p, 1);
  s.m = integer(j, "m", p, 1);
  if (s.d < 1 || s.m < 1) throw ConfigError("field 'system.d/m': must be >= 1");
  if (!j.contains("drift") || !j["drift"].is_array() || static_cast<int>(j["drift"].size()) != s.d)
    throw ConfigError("field 'system.drift': expected " + std::to_string(s.d) + " polynomials");
  if (!j.contains("sigma") || !j["sigma"].is_array() || static_cast<int>(j["sigma"].size()) != s.d * s.m)
    throw ConfigError("field 'system.sigma': expected " + std::to_string(s.d * s.m) + " polynomials (row-major d x m)");
  for (int a = 0; a < s.d; ++a) s.drift.push_back(poly_from_json(j["drift"][a], "system.drift[" + std::to_string(a) + "]", s.d));
  for (int a = 0; a < s.d * s.m; ++a)
    s.sigma.push_back(poly_from_json(j["sigma"][a], "system.sigma[" + std::to_string(a) + "]", s.d));
  return s;
}

Json to_json(const PolynomialSystemSpec& s) {
  Json drift = Json::array(), sigma = Json::array();
  for (const auto& p : s.drift) drift.push_back(poly_json(p));
  for (const auto& p : s.sigma) sigma.push_back(poly_json(p));
  return Json{{"d", s.d}, {"m", s.m}, {"drift", drift}, {"sigma", sigma}};
}

void write_rough_path(const RoughPath& rp, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto& x = rp.level1();
  write_path_csv(x, dir + "/level1.csv");
  std::ofstream out(dir + "/level2.csv");
  if (!out) throw std::runtime_error("cannot write " + dir + "/level2.csv");
  const int m = rp.dim();
  out << "t_from,t_to";
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out << ",xx" << (a + 1) << (b + 1);
  out << '\n';
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    out << fmt(x.time(i)) << ',' << fmt(x.time(i + 1));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) out << ',' << fmt(rp.level2()[i](a, b));
    out << '\n';
  }
  write_json_file(Json{{"alpha", rp.alpha()}, {"dim", m}, {"samples", x.size()},
                       {"level1", "level1.csv"}, {"level2", "level2.csv"},
                       {"level2_layout", "row-major m x m per grid cell"}},
                  dir + "/manifest.json");
}

RoughPath read_rough_path(const std::string& dir) {
  const Json man = read_json_file(dir + "/manifest.json");
  const double alpha = num_required(man, "alpha", "manifest");
  SampledPath x = read_path_csv(dir + "/level1.csv");
  const int m = x.dim();
  std::ifstream in(dir + "/level2.csv");
  if (!in) throw ConfigError(dir + "/level2.csv: cannot open");
  std::string line;
  std::getline(in, line);
  std::vector<Mat> l2;
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    const std::string where = dir + "/level2.csv:" + std::to_string(ln);
    const auto cells = split(line);
    if (cells.size() != static_cast<std::size_t>(2 + m * m)) throw ConfigError(where + ": wrong column count");
    const std::size_t i = l2.size();
    if (i + 1 >= x.size() || parse_double(cells[0], where) != x.time(i) || parse_double(cells[1], where) != x.time(i + 1))
      throw ConfigError(where + ": cell times do not match level1.csv");
    Mat a(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) a(r, c) = parse_double(cells[2 + r * m + c], where);
    l2.push_back(a);
  }
  if (l2.size() + 1 != x.size()) throw ConfigError(dir + "/level2.csv: expected one row per grid cell");
  return RoughPath(std::move(x), std::move(l2), alpha);
}

Json trajectory_status_json(const Trajectory& tr) {
  Json j;
  j["status"] = to_string(tr.status);
  j["blowup_time"] = tr.blowup_time ? Json(*tr.blowup_time) : Json(nullptr);
  j["scheme"] = tr.scheme;
  j["samples"] = tr.path.size();
  j["end_time"] = tr.path.end();
  j["final_norm"] = tr.path.value(tr.path.size() - 1).norm();
  j["max_norm"] = tr.max_norm();
  j["substeps"] = tr.substeps;
  Json lc = Json::array();
  for (const auto& c : tr.level_crossings) lc.push_back(Json{{"radius", c.radius}, {"time", c.time}, {"index", c.index}});
  j["level_crossings"] = lc;
  if (!tr.exit_times.empty()) j["exit_times"] = tr.exit_times;
  return j;
}

Json to_json(const CertificateReport& r, std::size_t envelope_rows) {
  Json j;
  j["overall"] = to_string(r.overall);
  j["reason"] = r.reason;
  j["trajectory_status"] = r.trajectory_status;
  j["R"] = r.R;
  j["K"] = r.K;
  j["K_method"] = r.K_method;
  j["R0"] = r.R0;
  j["b_a_T"] = r.b_a_T;
  j["lemma_violations"] = r.lemma_violations();
  Json lv = Json::array();
  for (const auto& l : r.levels)
    lv.push_back(Json{{"k", l.k},
                      {"radius_from", l.radius_from},
                      {"radius_to", l.radius_to},
                      {"delta", l.delta},
                      {"tau_from", l.tau_from},
                      {"tau_to", l.tau_to},
                      {"gap", l.gap},
                      {"oscillation", l.oscillation},
                      {"bound", l.bound},
                      {"window_sup_norm", l.window_sup_norm},
                      {"gap_ok", l.gap_ok},
                      {"interactive_ok", l.interactive_ok},
                      {"verdict", to_string(l.verdict)}});
  j["levels"] = lv;
  Json env;
  env["exhausted"] = r.envelope.exhausted;
  env["horizon"] = r.envelope.horizon;
  env["tabulated_levels"] = r.envelope.deltas.size();
  if (!r.envelope.psi.empty()) {
    env["psi_total"] = r.envelope.psi.back();
    env["level_bound_at_horizon"] = r.envelope.level_bound(r.envelope.horizon);
  }
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.envelope.deltas.size() && i < envelope_rows; ++i)
    rows.push_back(Json{{"k", i}, {"delta", r.envelope.deltas[i]}, {"psi", r.envelope.psi[i + 1]}});
  env["rows"] = rows;
  j["envelope"] = env;
  return j;
}

Json to_json(const Lemma33Result& r) {
  return Json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"residual", r.residual},
              {"assumption_violation", r.assumption_violation}, {"detail", r.detail}};
}

Json to_json(const PvarReport& r) {
  Json lv = Json::array();
  for (const auto& l : r.levels)
    lv.push_back(Json{{"k", l.k}, {"delta", l.delta}, {"oscillation", l.oscillation}, {"gap", l.gap},
                      {"bad", l.bad}, {"gap_ok", l.gap_ok}});
  return Json{{"R", r.R},           {"p", r.p},       {"bad_sum", r.bad_sum},          {"pvar_bound", r.pvar_bound},
              {"bound_ok", r.bound_ok}, {"good_levels_ok", r.good_levels_ok}, {"overall", to_string(r.overall)},
              {"levels", lv}};
}

Json to_json(const PropagationReport& r) {
  Json st = Json::array();
  for (const auto& s : r.starts) {
    Json lv = Json::array();
    for (const auto& l : s.levels) lv.push_back(Json{{"k", l.k}, {"delta", l.delta}, {"gap", l.gap}, {"gap_ok", l.gap_ok}});
    st.push_back(Json{{"x0", vec_json(s.x0)}, {"levels", lv}});
  }
  return Json{{"R", r.R},
              {"assumption_ok", r.assumption_ok},
              {"worst_pair_margin", opt_num(r.worst_pair_margin)},
              {"crossings", r.crossings},
              {"violations", r.violations},
              {"overall", to_string(r.overall)},
              {"reason", r.reason},
              {"starts", st}};
}

}  // namespace roughflow
