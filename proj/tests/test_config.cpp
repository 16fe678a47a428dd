#include "ergodic/config.hpp"
#include "ergodic/errors.hpp"

#include <doctest.h>

#include <string>

using namespace ergodic;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal file materializes the defaults") {
  const RunConfig c = parse_config("scenario:\n  name: eikonal1d\n");
  CHECK(c.scenario == "eikonal1d");
  CHECK(c.grid == std::vector<int>{128});
  CHECK(c.critical.delta_schedule == std::vector<double>{1e-1, 3e-2, 1e-2, 3e-3, 1e-3});
  CHECK(c.critical.t1 == 10.0);
  CHECK(c.critical.t2 == 20.0);
  CHECK(c.solver.mode == SweepMode::parallel);
  CHECK(c.weak_kam.check_times == std::vector<double>{0.25, 0.5, 1.0});
  CHECK(c.homogenize.epsilons == std::vector<double>{0.25, 0.125, 0.0625});

  const RunConfig empty = parse_config("");
  CHECK(empty.scenario == "eikonal1d");
}

TEST_CASE("values are read from every section") {
  const RunConfig c = parse_config(
      "scenario:\n  name: grushin2d\n  params:\n    beta: 0.3\n"
      "grid: [32, 16]\n"
      "solver:\n  mode: serial\n  tol: 1.0e-8\n"
      "critical:\n  method: discount\n  delta_schedule: [0.2, 0.1, 0.05]\n"
      "reach:\n  K: [2]\n"
      "output:\n  dir: results\n");
  CHECK(c.scenario == "grushin2d");
  CHECK(c.params.at("beta") == 0.3);
  CHECK(c.grid == std::vector<int>{32, 16});
  CHECK(c.solver.mode == SweepMode::serial);
  CHECK(c.solver.tol == 1e-8);
  CHECK(c.critical.method == "discount");
  CHECK(c.reach.K == std::vector<double>{2.0});
  CHECK(c.output_dir == "results");
}

TEST_CASE("invalid values name the offending key") {
  CHECK(config_error("critical:\n  delta_schedule: [0.1, -0.01, -0.02]\n").find("delta_schedule") != std::string::npos);
  CHECK(config_error("critical:\n  delta_schedule: [0.1, 0.2, 0.01]\n").find("delta_schedule") != std::string::npos);
  CHECK(config_error("grid: [2]\n").find("grid") != std::string::npos);
  CHECK(config_error("critical:\n  t1: 5\n  t2: 4\n").find("critical.t2") != std::string::npos);
  CHECK(config_error("solver:\n  mode: fastest\n").find("mode") != std::string::npos);
  CHECK(config_error("scenario:\n  name: nowhere\n").find("scenario") != std::string::npos);
  CHECK(config_error("grid: [8, 8]\n").find("grid") != std::string::npos);
}

TEST_CASE("unknown keys are rejected by name") {
  CHECK(config_error("solver:\n  tolerance: 1e-6\n").find("tolerance") != std::string::npos);
  CHECK(config_error("colour: blue\n").find("colour") != std::string::npos);
  CHECK(config_error("scenario:\n  name: eikonal1d\n  params:\n    nope: 1\n").find("nope") != std::string::npos);
}

TEST_CASE("malformed values") {
  CHECK_FALSE(config_error("grid: many\n").empty());
  CHECK_FALSE(config_error("scenario: [\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("echo round trip") {
  const RunConfig c = parse_config("scenario:\n  name: drift1d\ngrid: [64]\ndiscount:\n  delta: 0.05\n");
  const RunConfig d = parse_config(echo_config(c));
  CHECK(d.scenario == c.scenario);
  CHECK(d.grid == c.grid);
  CHECK(d.discount.delta == c.discount.delta);
  CHECK(echo_config(d) == echo_config(c));
}
