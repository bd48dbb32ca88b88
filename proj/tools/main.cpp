#include "run_config.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace roughflow;
using namespace roughflow::cli;

namespace {

// Raw flag values; resolved into a RunConfig once the command is known.
struct Flags {
  std::string config;
  std::string system = "linear-ou";
  std::vector<std::string> params;
  std::string driver;
  std::string solver;
  std::string x0;
  std::string T;
  std::string mesh;
  std::uint64_t seed = 0;
  std::vector<double> hurst;
  int refine = 16;
  std::string cap, floor, threshold;
  std::string out;
  // certify
  std::string growth;
  std::string f = "1+s";
  double beta = 0;
  double R = 0;
  int levels = 64;
  // sweep
  std::string seeds;
  std::string starts;
  std::string grid;
  unsigned threads = 0;
  // estimate
  std::string path;
  std::vector<double> holder;
  std::vector<double> pvar;
  bool exponent = false;
  // reproduce
  std::string id;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) out.push_back(std::stoull(part));
      else {
        const auto lo = std::stoull(part.substr(0, dash)), hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("--seeds: empty range '" + part + "'");
        for (auto k = lo; k <= hi; ++k) out.push_back(k);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("--seeds: cannot parse '" + part + "' (use e.g. 0-9 or 1,4,7)");
    }
  }
  return out;
}

std::vector<Vec> parse_starts(const std::string& starts, const std::string& grid, int d) {
  std::vector<Vec> out;
  if (!starts.empty()) {
    std::stringstream ss(starts);
    std::string pt;
    while (std::getline(ss, pt, ';')) {
      Vec v = parse_vec(pt, "--starts");
      if (v.size() != d) throw ConfigError("--starts: point '" + pt + "' must have " + std::to_string(d) + " coordinates");
      out.push_back(v);
    }
  }
  if (!grid.empty()) {
    // lo:hi:n on every coordinate (Cartesian product)
    std::stringstream ss(grid);
    std::string a, b, n;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n))
      throw ConfigError("--grid: expected lo:hi:n");
    const double lo = parse_real(a, "--grid"), hi = parse_real(b, "--grid");
    const int count = static_cast<int>(parse_real(n, "--grid"));
    if (count < 1) throw ConfigError("--grid: n must be >= 1");
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
      Vec v(d);
      for (int k = 0; k < d; ++k) v(k) = count == 1 ? lo : lo + (hi - lo) * idx[static_cast<std::size_t>(k)] / (count - 1);
      out.push_back(v);
      int k = 0;
      while (k < d && ++idx[static_cast<std::size_t>(k)] == count) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == d) break;
    }
  }
  return out;
}

RunConfig resolve(const std::string& command, const Flags& f) {
  if (!f.config.empty()) {
    RunConfig c = run_config_from_json(read_json_file(f.config));
    if (c.command != command)
      throw ConfigError(f.config + ": config was written by '" + c.command + "', not '" + command + "'");
    if (!f.out.empty()) c.out = f.out;
    return c;
  }
  RunConfig c;
  c.command = command;
  c.out = f.out.empty() ? "." : f.out;
  const std::string sys_name = command == "reproduce" ? f.id : f.system;
  if (ends_with(sys_name, ".json")) c.polynomial = polynomial_spec_from_json(read_json_file(sys_name));
  else c.system_id = sys_name;
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--param: expected key=value, got '" + kv + "'");
    c.params[kv.substr(0, eq)] = parse_real(kv.substr(eq + 1), "--param " + kv.substr(0, eq));
  }
  const VectorFieldSystem sys = build_system(c);
  const auto entry = gallery_entry(c);

  if (entry) {
    c.driver = entry->driver_spec;
    c.driver_mode = entry->driver;
    c.solver = entry->solver;
    c.x0 = entry->x0;
    c.T = entry->driver_spec.horizon;
  } else {
    c.driver.dim = sys.m;
    c.x0 = Vec::Zero(sys.d);
    c.solver = sys.additive_identity ? "ode" : "rde";
  }
  if (!f.driver.empty()) {
    if (ends_with(f.driver, ".json")) {
      c.driver = driver_spec_from_json(read_json_file(f.driver));
      c.driver_mode = c.driver.kind == DriverKind::deterministic_file ? "file" : to_json(c.driver)["kind"].get<std::string>();
      c.T = c.driver.horizon;
    } else {
      static const std::vector<std::string> modes{"brownian", "fbm", "levy", "pure-quadratic", "none", "sharp-counterexample"};
      if (std::find(modes.begin(), modes.end(), f.driver) == modes.end())
        throw ConfigError("--driver: unknown driver '" + f.driver +
                          "' (brownian, fbm, levy, pure-quadratic, none, sharp-counterexample, or a DriverSpec .json)");
      c.driver_mode = f.driver;
      if (f.driver == "fbm") c.driver.kind = DriverKind::fbm;
      else if (f.driver == "levy") {
        c.driver.kind = DriverKind::levy;
        c.driver.levy.drift = Vec::Zero(sys.m);
        c.driver.levy.covariance = Mat::Identity(sys.m, sys.m);
      } else c.driver.kind = DriverKind::brownian;
      if (f.driver == "pure-quadratic") c.solver = "rde";
      if (!entry && f.driver != "brownian" && f.driver != "pure-quadratic" && !sys.additive_identity) c.solver = "young";
    }
  }
  if (!f.solver.empty()) c.solver = f.solver;
  if (!f.x0.empty()) c.x0 = parse_vec(f.x0, "--x0");
  if (c.x0.size() != sys.d) throw ConfigError("--x0: system '" + sys.name + "' needs " + std::to_string(sys.d) + " coordinates");
  if (!f.T.empty()) c.T = parse_real(f.T, "--T");
  if (!(c.T > 0)) throw ConfigError("--T: horizon must be positive");
  if (!f.mesh.empty()) c.driver.mesh = parse_real(f.mesh, "--mesh");
  c.driver.seed = f.seed;
  if (!f.hurst.empty()) c.driver.hurst = f.hurst;
  c.driver.dim = sys.m;
  c.driver.horizon = c.T;
  c.refine = f.refine;
  if (!f.cap.empty()) c.control.displacement_cap = parse_real(f.cap, "--cap");
  if (!f.floor.empty()) c.control.step_floor = parse_real(f.floor, "--step-floor");
  if (!f.threshold.empty()) c.control.blowup_threshold = parse_real(f.threshold, "--threshold");

  if (command == "certify") {
    if (!f.growth.empty()) c.growth = growth_spec_from_json(read_json_file(f.growth));
    else {
      GrowthSpec g;
      g.f = control_from_json(Json(f.f));
      if (c.driver_mode == "sharp-counterexample") g.beta = 1.0 + (c.params.count("alpha") ? c.params.at("alpha") : 0.2);
      if (f.beta != 0) g.beta = f.beta;
      g.validate();
      c.growth = g;
    }
    c.R = f.R;
    c.levels = f.levels;
  }
  if (command == "sweep") {
    c.seeds = f.seeds.empty() ? std::vector<std::uint64_t>{f.seed} : parse_seeds(f.seeds);
    c.starts = parse_starts(f.starts, f.grid, sys.d);
    if (c.starts.empty()) c.starts.push_back(c.x0);
    c.threads = f.threads;
  }
  if (command == "estimate") {
    c.path_file = f.path;
    c.holder = f.holder;
    c.pvar = f.pvar;
    c.exponent = f.exponent || (f.holder.empty() && f.pvar.empty());
  }
  return c;
}

void prepare_out(const RunConfig& c) {
  std::filesystem::create_directories(c.out);
  write_json_file(to_json(c), c.out + "/config.json");
}

int status_exit(const Trajectory& tr) { return tr.status == TrajectoryStatus::completed ? kOk : kBlownUp; }

int cmd_simulate(const RunConfig& c) {
  prepare_out(c);
  const auto sys = build_system(c);
  const auto drv = build_driver(c, sys);
  const auto tr = solve(c, sys, drv, c.control);
  write_path_csv(tr.path, c.out + "/trajectory.csv");
  Json st = trajectory_status_json(tr);
  st["system"] = sys.name;
  write_json_file(st, c.out + "/status.json");
  std::cout << to_string(tr.status);
  if (tr.blowup_time) std::cout << " blowup_time=" << *tr.blowup_time;
  std::cout << '\n';
  return status_exit(tr);
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::pass: return kOk;
    case Verdict::fail: return kFail;
    case Verdict::inconclusive: return kInconclusive;
  }
  return kError;
}

int cmd_certify(const RunConfig& c) {
  prepare_out(c);
  GrowthSpec spec = *c.growth;
  const auto sys = build_system(c);
  if (spec.b_a_T == 0.0) spec.b_a_T = estimate_b_a_T(sys, spec.a, c.T);

  Trajectory tr;
  double K = 0.0, R = 0.0;
  if (c.driver_mode == "sharp-counterexample") {
    if (c.system_id != "radial-rotation") throw ConfigError("driver 'sharp-counterexample' belongs to system 'radial-rotation'");
    const double alpha = c.params.count("alpha") ? c.params.at("alpha") : 0.2;
    const double mu = c.params.count("mu") ? c.params.at("mu") : 0.15;
    auto sc = sharp_counterexample(alpha, mu, c.x0, c.driver.mesh);
    K = estimate_K(sc.x.eta, spec.beta);
    R = c.R > 0 ? c.R : 1.01 * compute_R0(K, spec.b_a_T);
    tr = sharp_counterexample(alpha, mu, c.x0, c.driver.mesh, 1e6, StepControl::ladder(R, c.levels)).x;
  } else {
    const auto drv = build_driver(c, sys);
    const auto first = solve(c, sys, drv, c.control);
    K = estimate_K(first.eta, spec.beta);
    R = c.R > 0 ? c.R : 1.01 * compute_R0(K, spec.b_a_T);
    StepControl ctrl = c.control;
    ctrl.radii = StepControl::ladder(R, c.levels);
    tr = solve(c, sys, drv, ctrl);
  }
  auto rep = crossing_audit(tr, tr.eta, spec, R, K);
  rep.K_method = "discrete (beta-1)-Hoelder seminorm of the effective driver";
  write_path_csv(tr.path, c.out + "/trajectory.csv");
  Json j = to_json(rep);
  j["growth"] = to_json(spec);
  j["trajectory"] = trajectory_status_json(tr);
  write_json_file(j, c.out + "/certificate.json");
  std::cout << to_string(rep.overall) << ": " << rep.reason << '\n';
  return verdict_exit(rep.overall);
}

int cmd_reproduce(const RunConfig& c) {
  prepare_out(c);
  const auto entry = gallery_entry(c);
  if (!entry) throw ConfigError("reproduce needs a gallery id");
  const auto sys = entry->system;
  const auto drv = build_driver(c, sys);
  const auto tr = solve(c, sys, drv, c.control);
  write_path_csv(tr.path, c.out + "/trajectory.csv");
  {
    std::ofstream plot(c.out + "/plot.csv");
    plot << "t,norm,log10_norm\n";
    for (std::size_t i = 0; i < tr.path.size(); ++i) {
      const double n = tr.path.value(i).norm();
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", tr.path.time(i), n, std::log10(std::max(n, 1e-300)));
      plot << buf;
    }
  }
  Json rep;
  rep["id"] = entry->id;
  rep["notes"] = entry->notes;
  rep["oracle_note"] = entry->oracle_note;
  rep["trajectory"] = trajectory_status_json(tr);
  int code = kOk;
  if (entry->blowup_oracle) {
    const auto expected = entry->blowup_oracle(c.x0);
    bool ok;
    if (expected) {
      rep["oracle_blowup_time"] = *expected;
      ok = tr.blowup_time && std::abs(*tr.blowup_time - *expected) <= 0.02 * *expected;
      if (tr.blowup_time) rep["relative_error"] = std::abs(*tr.blowup_time - *expected) / *expected;
    } else {
      rep["oracle_blowup_time"] = nullptr;
      ok = tr.status == TrajectoryStatus::completed;
    }
    rep["oracle_ok"] = ok;
    if (!ok) code = kFail;
  }
  write_json_file(rep, c.out + "/report.json");
  std::cout << entry->id << ": " << to_string(tr.status);
  if (tr.blowup_time) std::cout << " blowup_time=" << *tr.blowup_time;
  std::cout << '\n';
  return code;
}

int cmd_lift(const RunConfig& c) {
  prepare_out(c);
  RunConfig rc = c;
  rc.solver = "rde";
  const auto sys = build_system(rc);
  const auto rp = std::get<RoughPath>(build_driver(rc, sys));
  write_rough_path(rp, c.out + "/lift");
  Json j{{"samples", rp.size()}, {"dim", rp.dim()}, {"alpha", rp.alpha()}, {"chen_defect", chen_defect(rp)}};
  write_json_file(j, c.out + "/lift/summary.json");
  std::cout << j.dump() << '\n';
  return kOk;
}

int cmd_estimate(const RunConfig& c) {
  prepare_out(c);
  SampledPath p;
  if (!c.path_file.empty()) p = read_path_csv(c.path_file);
  else {
    const auto sys = build_system(c);
    RunConfig rc = c;
    if (rc.solver == "rde") rc.solver = "young";
    p = std::get<SampledPath>(build_driver(rc, sys));
  }
  Json j;
  j["samples"] = p.size();
  Json h = Json::object(), v = Json::object();
  for (double a : c.holder) h[std::to_string(a)] = holder_norm(p, a);
  for (double q : c.pvar) v[std::to_string(q)] = p_variation(p, q);
  if (!c.holder.empty()) j["holder_norm"] = h;
  if (!c.pvar.empty()) j["p_variation"] = v;
  if (c.exponent) j["holder_exponent"] = holder_exponent_estimate(p);
  write_json_file(j, c.out + "/estimate.json");
  std::cout << j.dump() << '\n';
  return kOk;
}

int cmd_sweep(const RunConfig& c) {
  prepare_out(c);
  const auto sys = build_system(c);
  std::vector<FlowGrid> grids(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
    RunConfig rc = c;
    rc.driver.seed = c.seeds[i];
    if (rc.solver == "localize") rc.solver = "ode";
    const auto drv = build_driver(rc, sys);
    grids[i] = flow_grid(sys, drv, c.starts, c.T, c.control, 1);
  });
  std::ofstream out(c.out + "/sweep.csv");
  out << "seed,start";
  for (int k = 0; k < sys.d; ++k) out << ",x0_" << (k + 1);
  out << ",status,blowup_time,end_time,endpoint_norm,max_norm\n";
  std::size_t blown = 0;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < grids.size(); ++i)
    for (std::size_t s = 0; s < grids[i].summaries.size(); ++s) {
      const auto& f = grids[i].summaries[s];
      out << c.seeds[i] << ',' << s;
      for (int k = 0; k < sys.d; ++k) out << ',' << num(f.x0(k));
      out << ',' << to_string(f.status) << ',' << (f.blowup_time ? num(*f.blowup_time) : "") << ',' << num(f.end_time)
          << ',' << num(f.endpoint.norm()) << ',' << num(f.max_norm) << '\n';
      blown += f.status == TrajectoryStatus::completed ? 0 : 1;
    }
  std::cout << grids.size() * c.starts.size() << " runs, " << blown << " not completed\n";
  return kOk;
}

void add_common(CLI::App* sub, Flags& f, bool with_system = true) {
  sub->add_option("--config", f.config, "replay a config.json written by an earlier run");
  if (with_system) {
    sub->add_option("--system", f.system, "gallery id or polynomial system .json");
    sub->add_option("--param", f.params, "gallery parameter key=value (repeatable)");
  }
  sub->add_option("--driver", f.driver,
                  "brownian | fbm | levy | pure-quadratic | none | sharp-counterexample | DriverSpec .json");
  sub->add_option("--solver", f.solver, "ode | young | rde | localize");
  sub->add_option("--x0", f.x0, "initial state, comma separated");
  sub->add_option("--T", f.T, "horizon");
  sub->add_option("--mesh", f.mesh, "driver mesh, e.g. 2^-10");
  sub->add_option("--seed", f.seed, "driver seed");
  sub->add_option("--hurst", f.hurst, "fbm Hurst index (repeat for a sum of fBMs)");
  sub->add_option("--refine", f.refine, "Itô lift refinement");
  sub->add_option("--cap", f.cap, "drift displacement cap");
  sub->add_option("--step-floor", f.floor, "smallest drift substep");
  sub->add_option("--threshold", f.threshold, "blow-up norm threshold");
  sub->add_option("--out", f.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roughflow: non-explosion diagnostics for ODEs, Young and rough differential equations"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "solve one trajectory; exit 2 if it blows up");
  add_common(sim, f);
  auto* cert = app.add_subcommand("certify", "level-crossing audit; exit 0 pass, 3 fail, 4 inconclusive");
  add_common(cert, f);
  cert->add_option("--growth", f.growth, "GrowthSpec .json");
  cert->add_option("--f", f.f, "control: 1+s | log-affine | identity");
  cert->add_option("--beta", f.beta, "beta in (1,2)");
  cert->add_option("--R", f.R, "ladder spacing (default 1.01 R0)");
  cert->add_option("--levels", f.levels, "ladder length");
  auto* rep = app.add_subcommand("reproduce", "run a gallery entry end to end against its oracle");
  rep->add_option("id", f.id, "gallery id")->required();
  add_common(rep, f, false);
  auto* lift = app.add_subcommand("lift", "write a rough path (level1.csv, level2.csv, manifest.json)");
  add_common(lift, f);
  auto* est = app.add_subcommand("estimate", "Hölder norms, p-variation and Hölder exponent of a path");
  add_common(est, f);
  est->add_option("--path", f.path, "path CSV (t,x1,...,xd)");
  est->add_option("--holder", f.holder, "Hölder exponent(s) for the seminorm");
  est->add_option("--pvar", f.pvar, "p for the p-variation");
  est->add_flag("--exponent", f.exponent, "estimate the Hölder exponent");
  auto* sw = app.add_subcommand("sweep", "initial-condition and seed sweep on a bounded worker pool");
  add_common(sw, f);
  sw->add_option("--seeds", f.seeds, "e.g. 0-9 or 1,4,7");
  sw->add_option("--starts", f.starts, "points separated by ';', coordinates by ','");
  sw->add_option("--grid", f.grid, "lo:hi:n on every coordinate");
  sw->add_option("--threads", f.threads, "worker count (0: hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(resolve("simulate", f));
    if (cert->parsed()) return cmd_certify(resolve("certify", f));
    if (rep->parsed()) return cmd_reproduce(resolve("reproduce", f));
    if (lift->parsed()) return cmd_lift(resolve("lift", f));
    if (est->parsed()) return cmd_estimate(resolve("estimate", f));
    if (sw->parsed()) return cmd_sweep(resolve("sweep", f));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
