#pragma once

#include "ergodic/kernels.hpp"
#include "ergodic/system_model.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ergodic {

/// [f, g](x) = Dg(x) f(x) - Df(x) g(x) with central-difference Jacobians.
Vec lie_bracket(const VectorFieldFn& f, const VectorFieldFn& g, const Vec& x, double h_fd = 1e-3);

/// Column j of sys.fields as a vector field.
VectorFieldFn control_field(const AffineSystem& sys, int j);

struct BracketReport {
  int order_max = 4;
  double tolerance = 1e-8;
  std::vector<Vec> sample_points;
  std::vector<int> rank_at_point;
  /// Smallest depth at which the point reached rank n, 0 if never.
  std::vector<int> order_at_point;
  bool generated = false;
  /// Largest entry of order_at_point when generated.
  int generated_order = 0;
};

/// Rank of the left-normed brackets [f^i1,[f^i2,...,f^ik]] (k <= order_max)
/// at each sample point; rank counts singular values > tol * largest.
BracketReport check_sbg(const AffineSystem& sys, int order_max,
                        const std::vector<Vec>& sample_points, double tol = 1e-8,
                        double h_fd = 1e-3);

/// Points k/per_axis in every axis; includes x1 in {0, 1/2} for even per_axis.
std::vector<Vec> sbg_sample_points(int n, int per_axis);

struct ReachOptions {
  double K = 1.0;
  /// dt <= 0 uses (grid diagonal) / (max speed).
  double dt = 0.0;
  double horizon = 10.0;
  /// Spacing of the control lattice in B_m(K).
  double control_spacing = 0.125;
  SweepMode mode = SweepMode::parallel;
};

struct TimeTable {
  TorusGrid grid;
  std::vector<std::size_t> sources;
  std::vector<std::size_t> targets;
  /// t_sharp[s * targets.size() + t], +inf when unreachable within horizon.
  std::vector<double> t_sharp;
  double S = 0.0;
  double K_used = 0.0;
  double dt = 0.0;
  double horizon = 0.0;
  /// Upper bound on the snapping error of a single edge (half the diagonal).
  double snap_error = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> unreachable;
  std::vector<std::string> warnings;

  double at(std::size_t s, std::size_t t) const { return t_sharp[s * targets.size() + t]; }
  bool all_reachable() const { return unreachable.empty(); }
};

/// Shortest paths on the graph x -> nearest_node(x + dt dynamics(x, a)),
/// a in the control lattice of B_m(K), every edge of length dt. Sources and
/// targets are flat node indices; empty targets means every node.
TimeTable minimal_time_table(const AffineSystem& sys, const TorusGrid& grid,
                             const std::vector<std::size_t>& sources,
                             const std::vector<std::size_t>& targets,
                             const ReachOptions& options);

struct BtcResult {
  bool btc = false;
  double S = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> unreachable;
};

BtcResult btc_bound(const TimeTable& table);

struct KSweepStep {
  double K = 0.0;
  BtcResult result;
};

/// Runs minimal_time_table for each K in increasing order, stopping at the
/// first K with every pair reachable.
std::vector<KSweepStep> btc_sweep(const AffineSystem& sys, const TorusGrid& grid,
                                  const std::vector<std::size_t>& sources,
                                  const std::vector<std::size_t>& targets,
                                  std::vector<double> K_values, ReachOptions options);

/// Evenly strided node indices, `count` of them (all nodes if count >= N).
std::vector<std::size_t> strided_nodes(const TorusGrid& grid, std::size_t count);

void write_time_table_csv(const TimeTable& table, const std::filesystem::path& path);

}  // namespace ergodic
