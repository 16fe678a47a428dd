#pragma once

#include "ergodic/config.hpp"
#include "ergodic/critical_value.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ergodic {

struct InvariantCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::string command;
  std::string config_echo;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<InvariantCheck> checks;
  std::vector<std::filesystem::path> outputs;
  double wall_seconds = 0.0;

  bool all_passed() const;
  std::string render() const;
};

/// Commands: critical, weak-kam, discount, evolve, reach, check-sbg,
/// homogenize, report (every stage applicable to the scenario).
const std::vector<std::string>& run_commands();

/// Runs one pipeline, writes its CSVs under config.output_dir and returns the
/// report. A failing stage throws StageError naming the stage.
RunReport run_scenario(const RunConfig& config, const std::string& command);

class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct BisectionResult {
  double lambda = 0.0;
  double lower = 0.0;  // largest value seen to grow without bound
  double upper = 0.0;  // smallest value seen to stabilize
  int steps = 0;
};

/// Bisection on lambda in [lower, upper]: values where the weak-KAM iteration
/// stabilizes within t_max move the upper end down, values where it keeps
/// growing move the lower end up.
BisectionResult bisect_lambda(const AffineSystem& sys, const ScalarField& w_start, double lower,
                              double upper, int steps, const WeakKamOptions& options);

/// Grid of the configured sizes in the scenario dimension.
TorusGrid config_grid(const RunConfig& config);

}  // namespace ergodic
