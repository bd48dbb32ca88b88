#pragma once

#include "roughflow/certificates.hpp"
#include "roughflow/gallery.hpp"
#include "roughflow/io.hpp"
#include "roughflow/noise.hpp"
#include "roughflow/rough.hpp"
#include "roughflow/solvers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace roughflow::cli {

enum Exit { kOk = 0, kError = 1, kBlownUp = 2, kFail = 3, kInconclusive = 4 };

/// Fully resolved inputs of one run. Written to <out>/config.json by every
/// command; `--config` on that file replays the run.
struct RunConfig {
  std::string command;

  std::string system_id;  // gallery id; empty when `polynomial` is set
  GalleryParams params;
  std::optional<PolynomialSystemSpec> polynomial;

  // brownian | fbm | levy | file | pure-quadratic | none | sharp-counterexample
  std::string driver_mode = "brownian";
  DriverSpec driver;
  int refine = 16;  // Itô lift refinement for rde runs on a Brownian driver

  std::string solver;  // ode | young | rde | localize
  Vec x0;
  double T = 1.0;
  StepControl control;

  std::optional<GrowthSpec> growth;
  double R = 0.0;  // 0: 1.01 R0
  int levels = 64;

  std::vector<std::uint64_t> seeds;
  std::vector<Vec> starts;
  unsigned threads = 0;

  std::string path_file;
  std::vector<double> holder;
  std::vector<double> pvar;
  bool exponent = false;

  std::string out = ".";
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

/// Parses "0.001", "1e-3" or "2^-10".
double parse_real(const std::string& s, const std::string& what);
/// "1,0,-2" -> vector.
Vec parse_vec(const std::string& s, const std::string& what);

VectorFieldSystem build_system(const RunConfig& c);
/// Gallery entry for gallery systems (defaults, oracle); nullopt otherwise.
std::optional<GalleryEntry> gallery_entry(const RunConfig& c);

using BuiltDriver = std::variant<SampledPath, RoughPath>;
BuiltDriver build_driver(const RunConfig& c, const VectorFieldSystem& sys);

Trajectory solve(const RunConfig& c, const VectorFieldSystem& sys, const BuiltDriver& drv, const StepControl& ctrl);

}  // namespace roughflow::cli
