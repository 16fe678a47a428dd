#pragma once

#include "ergodic/catalog.hpp"
#include "ergodic/kernels.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ergodic {

struct SolverConfig {
  double tol = 1e-6;
  long max_iter = 50'000'000;
  double dt = 0.0;
  SweepMode mode = SweepMode::parallel;
  bool accelerate = true;
};

struct CriticalConfig {
  std::string method = "both";  // discount | longtime | both
  std::vector<double> delta_schedule{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  double t1 = 10.0;
  double t2 = 20.0;
  double agreement_tol = 5e-2;
  double bracket_slack = 5e-2;
  double osc_slope_min = 0.9;
};

struct DiscountConfig {
  double delta = 1e-2;
};

struct WeakKamConfig {
  double tol = 1e-3;
  double t_max = 200.0;
  std::vector<double> check_times{0.25, 0.5, 1.0};
  double residual_tol = 5e-2;
  double kink_exclusion = 2.0;
  bool bisect = false;
  double bisect_width = 0.25;
  int bisect_steps = 12;
};

struct EvolveConfig {
  double t_end = 1.0;
  long record_every = 100;
  std::string initial = "zero";  // zero | cos
  long comparison_steps = 200;
};

struct ReachConfig {
  std::vector<double> K{1.0, 2.0, 4.0};
  double dt = 0.0;
  double horizon = 10.0;
  double control_spacing = 0.125;
  long sources = 16;
  long targets = 0;  // 0: every node
};

struct SbgConfig {
  int order_max = 4;
  double tol = 1e-8;
  int samples_per_axis = 8;
  double h_fd = 1e-3;
};

struct HomogenizeConfig {
  std::string mode = "stationary";  // stationary | evolutive
  std::vector<double> epsilons{0.25, 0.125, 0.0625};
  int nodes_per_cell = 16;
  int min_nodes_per_cell = 8;
  int effective_nodes = 128;
  double t_compare = 0.5;
  int z_samples = 16;
  int p_samples = 33;
  double p_max = 2.0;
  int cell_nodes = 64;
  std::vector<double> cell_deltas{1e-1, 3e-2, 1e-2};
  double cell_tol = 1e-3;
  double stabilization_t = 5.0;
  double stabilization_tol = 5e-2;
};

struct RunConfig {
  std::string scenario = "eikonal1d";
  ScenarioParams params;
  std::vector<int> grid{128};
  SolverConfig solver;
  CriticalConfig critical;
  DiscountConfig discount;
  WeakKamConfig weak_kam;
  EvolveConfig evolve;
  ReachConfig reach;
  SbgConfig sbg;
  HomogenizeConfig homogenize;
  std::filesystem::path output_dir = "out";
};

/// Parses and validates a YAML run configuration. Unknown keys, malformed
/// values and violated constraints throw ConfigError naming the key (and the
/// line, when known).
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

/// Throws ConfigError naming the first violated constraint.
void validate(const RunConfig& config);

/// YAML rendering of a config with every default materialized.
std::string echo_config(const RunConfig& config);

std::string to_string(SweepMode mode);

}  // namespace ergodic
