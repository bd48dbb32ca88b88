#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "roughflow/io.hpp"
#include "roughflow/paths.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace roughflow;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "roughflow_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI with stderr captured into <work>/<tag>.err; returns the exit status.
int run(const std::string& args, const std::string& tag) {
  const std::string cmd = std::string(ROUGHFLOW_CLI) + " " + args + " --out " + (work() / tag).string() + " >" +
                          (work() / (tag + ".out")).string() + " 2>" + (work() / (tag + ".err")).string();
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simulate exit codes and replay") {
  CHECK(run("simulate --system linear-ou --driver brownian --seed 7 --T 1", "ou") == 0);
  CHECK(fs::exists(work() / "ou/trajectory.csv"));
  CHECK(fs::exists(work() / "ou/status.json"));

  CHECK(run("simulate --config " + (work() / "ou/config.json").string(), "ou_replay") == 0);
  CHECK(slurp(work() / "ou/trajectory.csv") == slurp(work() / "ou_replay/trajectory.csv"));

  CHECK(run("simulate --system gl09 --driver pure-quadratic --T 2", "gl09") == 2);
  const auto st = read_json_file((work() / "gl09/status.json").string());
  CHECK(st["status"] == "blown-up");
  CHECK(st["blowup_time"].get<double>() == doctest::Approx(1.0).epsilon(0.02));

  CHECK(run("simulate --system double-well --driver fbm --hurst 0.7 --seed 3 --solver young", "dw") == 0);
  CHECK(run("simulate --config " + (work() / "dw/config.json").string(), "dw_replay") == 0);
  CHECK(slurp(work() / "dw/trajectory.csv") == slurp(work() / "dw_replay/trajectory.csv"));
}

TEST_CASE("errors exit 1 with a diagnostic") {
  CHECK(run("simulate --system nope", "e1") == 1);
  CHECK(slurp(work() / "e1.err").find("linear-ou") != std::string::npos);
  CHECK(run("simulate --T abc", "e2") == 1);
  CHECK(slurp(work() / "e2.err").find("--T") != std::string::npos);
  CHECK(run("simulate --bogus-flag", "e3") == 1);

  std::ofstream(work() / "broken.json") << "{\n  \"command\": \"simulate\",\n  \"T\": ,\n}\n";
  CHECK(run("simulate --config " + (work() / "broken.json").string(), "e4") == 1);
  CHECK(slurp(work() / "e4.err").find(":3:") != std::string::npos);

  auto cfg = read_json_file((work() / "ou/config.json").string());
  cfg["driver"]["mesh"] = "fine";
  write_json_file(cfg, (work() / "typed.json").string());
  CHECK(run("simulate --config " + (work() / "typed.json").string(), "e5") == 1);
  CHECK(slurp(work() / "e5.err").find("mesh") != std::string::npos);
}

TEST_CASE("certify exit codes") {
  CHECK(run("certify --system linear-growth --driver brownian --T 5 --beta 1.4 --x0 1,0", "c_pass") == 0);
  const auto rep = read_json_file((work() / "c_pass/certificate.json").string());
  CHECK(rep["overall"] == "pass");
  CHECK(rep["lemma_violations"] == 0);

  CHECK(run("certify --system radial-rotation --driver sharp-counterexample --x0 2,0", "c_fail") == 3);
  CHECK(run("certify --system free --driver none", "c_none") == 4);
  // the OU process stays far below R0 at this horizon, so nothing is observed
  CHECK(run("certify --system linear-ou --driver brownian --T 5 --beta 1.4 --x0 1,0", "c_ou") == 4);
}

TEST_CASE("reproduce, lift, estimate and sweep") {
  CHECK(run("reproduce complex-square", "rep") == 0);
  const auto r = read_json_file((work() / "rep/report.json").string());
  CHECK(r["oracle_ok"] == true);
  CHECK(fs::exists(work() / "rep/plot.csv"));

  CHECK(run("lift --system elworthy --driver brownian --seed 2 --mesh 2^-8", "lift") == 0);
  CHECK(fs::exists(work() / "lift/lift/manifest.json"));
  CHECK(fs::exists(work() / "lift/lift/level2.csv"));

  const auto path = (work() / "ou/trajectory.csv").string();
  CHECK(run("estimate --path " + path + " --holder 0.3 --pvar 2.5", "est") == 0);
  const auto e = read_json_file((work() / "est/estimate.json").string());
  const auto p = read_path_csv(path);
  CHECK(e["holder_norm"].begin().value().get<double>() == holder_norm(p, 0.3));
  CHECK(e["p_variation"].begin().value().get<double>() == p_variation(p, 2.5));

  CHECK(run("sweep --system double-well --seeds 0-3 --grid -2:2:5 --threads 3", "sw") == 0);
  std::ifstream in(work() / "sw/sweep.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 20);
  CHECK(run("sweep --config " + (work() / "sw/config.json").string() + " --threads 1", "sw1") == 0);
  CHECK(slurp(work() / "sw/sweep.csv") == slurp(work() / "sw1/sweep.csv"));
}
