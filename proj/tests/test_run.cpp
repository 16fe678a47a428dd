#include "ergodic/config.hpp"
#include "ergodic/run.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ergodic;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ergodic_run_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string summary(const RunReport& r, const std::string& key) {
  for (const auto& [k, v] : r.summary)
    if (k == key) return v;
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("critical on the eikonal scenario") {
  RunConfig c = parse_config("scenario:\n  name: eikonal1d\ngrid: [64]\n");
  c.output_dir = scratch("critical");
  const RunReport r = run_scenario(c, "critical");
  CHECK(r.all_passed());
  CHECK_FALSE(summary(r, "lambda_discount").empty());
  CHECK_FALSE(summary(r, "lambda_longtime").empty());
  CHECK(std::filesystem::exists(c.output_dir / "discount_schedule.csv"));
  CHECK(std::filesystem::exists(c.output_dir / "critical_summary.csv"));
  const std::string text = r.render();
  CHECK(text.find("[PASS]") != std::string::npos);
  CHECK(text.find("[FAIL]") == std::string::npos);
  CHECK(text.find("scenario:") != std::string::npos);
  std::filesystem::remove_all(c.output_dir);
}

TEST_CASE("check-sbg on Grushin") {
  RunConfig c = parse_config("scenario:\n  name: grushin2d\ngrid: [16]\n");
  c.output_dir = scratch("sbg");
  const RunReport r = run_scenario(c, "check-sbg");
  CHECK(r.all_passed());
  CHECK(summary(r, "generated") == "true");
  CHECK(summary(r, "generated_order") == "2");
  std::filesystem::remove_all(c.output_dir);
}

TEST_CASE("homogenize on constant data has zero error") {
  RunConfig c = parse_config(
      "scenario:\n  name: const1d\n"
      "homogenize:\n  epsilons: [0.25, 0.125]\n  z_samples: 4\n  p_samples: 9\n  cell_nodes: 32\n"
      "  effective_nodes: 64\n");
  c.output_dir = scratch("homog");
  const RunReport r = run_scenario(c, "homogenize");
  CHECK(r.all_passed());
  CHECK(std::stod(summary(r, "error(eps=0.25)")) <= 1e-6);
  CHECK(std::filesystem::exists(c.output_dir / "effective_table.csv"));
  std::filesystem::remove_all(c.output_dir);
}

TEST_CASE("commands that do not fit the scenario are rejected") {
  RunConfig c = parse_config("scenario:\n  name: eikonal1d\ngrid: [16]\n");
  c.output_dir = scratch("reject");
  CHECK_THROWS(run_scenario(c, "homogenize"));
  CHECK_THROWS(run_scenario(c, "no-such-command"));
  std::filesystem::remove_all(c.output_dir);
}

TEST_CASE("serial runs are deterministic") {
  RunConfig c = parse_config("scenario:\n  name: drift1d\ngrid: [64]\nsolver:\n  mode: serial\n");
  c.output_dir = scratch("det_a");
  run_scenario(c, "discount");
  const std::string a = slurp(c.output_dir / "discount_w.csv");
  std::filesystem::remove_all(c.output_dir);
  c.output_dir = scratch("det_b");
  run_scenario(c, "discount");
  const std::string b = slurp(c.output_dir / "discount_w.csv");
  std::filesystem::remove_all(c.output_dir);
  CHECK_FALSE(a.empty());
  CHECK(a == b);
}

TEST_CASE("report runs every applicable stage") {
  RunConfig c = parse_config(
      "scenario:\n  name: eikonal1d\ngrid: [32]\n"
      "evolve:\n  t_end: 0.25\n"
      "reach:\n  K: [1, 2]\n  sources: 4\n");
  c.output_dir = scratch("report");
  const RunReport r = run_scenario(c, "report");
  for (const InvariantCheck& k : r.checks) {
    INFO(k.name << ": " << k.detail);
    CHECK(k.passed);
  }
  for (const char* f : {"discount_schedule.csv", "chi.csv", "discount_w.csv", "time_table.csv", "critical_summary.csv"})
    CHECK(std::filesystem::exists(c.output_dir / f));
  CHECK(std::filesystem::exists(c.output_dir / "report_report.txt"));
  CHECK_FALSE(summary(r, "generated").empty());
  std::filesystem::remove_all(c.output_dir);
}

TEST_CASE("config grid replicates a single size") {
  const RunConfig c = parse_config("scenario:\n  name: grushin2d\ngrid: [12]\n");
  CHECK(config_grid(c).sizes() == std::vector<int>{12, 12});
}
