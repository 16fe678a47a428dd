#pragma once

#include "ergodic/critical_value.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ergodic {

/// Cell data at frozen (z, P):
///   b_cell = f + sigma^T sigma P,  l_cell = g(z,.) - f.P - 1/2 |sigma P|^2.
struct FrozenData {
  VectorFieldFn b_cell;
  ScalarFn l_cell;
};

FrozenData frozen_data(const OscillatingSystem& osc, const Vec& z, const Vec& P);

/// Critical-value problem in the fast variable whose critical value is
/// -Hbar(z, P). Quadratic controls use the frozen data; bounded controls use
/// L = 1/2 a^T G a + g(z,x) - P.(f + F a).
AffineSystem cell_system(const OscillatingSystem& osc, const Vec& z, const Vec& P);

/// The oscillating problem at scale eps as a system in the slow variable:
/// drift f(z/eps), fields F(z/eps), metric G(z/eps), potential g(z, z/eps).
AffineSystem scaled_system(const OscillatingSystem& osc, double epsilon);

/// The driftless zero-cost system whose semigroup solves
/// w_t + 1/2 |sigma D w|^2 = 0.
AffineSystem stabilization_system(const OscillatingSystem& osc);

struct CellOptions {
  int nodes_per_axis = 64;
  std::vector<double> deltas{1e-1, 3e-2, 1e-2};
  DiscountedOptions discount{};
};

/// Hbar(z, P) = -lambda of the cell system, lambda by the discount estimate.
double effective_hamiltonian(const OscillatingSystem& osc, const Vec& z, const Vec& P,
                             const CellOptions& options = {});

struct ModulusSample {
  std::size_t z_index = 0;
  std::size_t z_other = 0;
  std::size_t p_index = 0;
  double difference = 0.0;  // |Hbar(z,P) - Hbar(z',P)|
  double omega = 0.0;       // sampled modulus of g at |z - z'|
};

struct TableOptions {
  int z_per_axis = 16;
  int p_per_axis = 33;
  double p_max = 2.0;
  /// Absolute accuracy attributed to a single cell value.
  double cell_tol = 1e-3;
  /// Fast-variable nodes per axis used for the modulus of g.
  int modulus_nodes = 128;
  CellOptions cell{};
  SweepMode mode = SweepMode::parallel;
};

/// Hbar tabulated on a periodic z grid times a uniform P grid in
/// [-p_max, p_max]^n. Row-major index: z_flat * P_count + P_flat.
struct EffectiveTable {
  int n = 1;
  TorusGrid z_grid;
  int p_per_axis = 0;
  double p_max = 0.0;
  double cell_tol = 0.0;
  std::vector<double> values;
  std::vector<ModulusSample> modulus_check;
  /// Largest |Hbar(P_k+1) - Hbar(P_k)| / dP per P axis: Lipschitz constant of
  /// the interpolant in P.
  std::vector<double> p_lipschitz;
  double convexity_defect = 0.0;
  double symmetry_defect = 0.0;

  std::size_t p_count() const;
  double p_spacing() const { return 2.0 * p_max / (p_per_axis - 1); }
  Vec z_sample(std::size_t k) const { return z_grid.coordinates(k); }
  Vec p_sample(std::size_t k) const;
  double at(std::size_t z_flat, std::size_t p_flat) const { return values[z_flat * p_count() + p_flat]; }

  /// Multilinear interpolation, periodic in z. Throws RangeError when P
  /// leaves [-p_max, p_max]^n; the offending component is reported.
  double operator()(const Vec& z, const Vec& P) const;

  /// Largest violation of |Hbar(z,P) - Hbar(z',P)| <= omega + 2 cell_tol
  /// (<= 0 when the bound holds everywhere).
  double modulus_violation() const;
};

EffectiveTable effective_table(const OscillatingSystem& osc, const TableOptions& options = {});

/// Fills modulus_check, p_lipschitz, convexity and symmetry diagnostics.
void analyze_table(const OscillatingSystem& osc, EffectiveTable& table, int modulus_nodes);

void write_effective_table_csv(const EffectiveTable& table, const std::filesystem::path& path);

/// Smallest fine-grid size resolving eps with `nodes_per_cell` nodes per cell.
int fine_grid_size(double epsilon, int nodes_per_cell);

/// v^eps for the delta = 1 discounted oscillating problem. Throws DomainError
/// when the grid has fewer than `min_nodes_per_cell` nodes per eps-cell.
ScalarField solve_oscillating_stationary(const OscillatingSystem& osc, double epsilon,
                                         const TorusGrid& fine_grid,
                                         const DiscountedOptions& options = {},
                                         int min_nodes_per_cell = 8);

/// v^eps(., t_end) of the Cauchy problem with data h(z, z/eps).
ScalarField solve_oscillating_evolutive(const OscillatingSystem& osc, double epsilon,
                                        const TorusGrid& fine_grid, double t_end,
                                        int min_nodes_per_cell = 8,
                                        SweepMode mode = SweepMode::parallel);

struct EffectiveOptions {
  double tol = 1e-7;
  long max_iter = 5'000'000;
  double dt = 0.0;  // evolutive only; <= 0 uses the CFL step
  SweepMode mode = SweepMode::parallel;
};

struct EffectiveSolve {
  ScalarField v;
  long iterations = 0;
  double dt = 0.0;
  double max_gradient = 0.0;
};

/// v + Hbar(z, Dv) = 0 by a monotone Lax-Friedrichs fixed point.
EffectiveSolve solve_effective_stationary(const EffectiveTable& table, const TorusGrid& grid,
                                          const EffectiveOptions& options = {});

/// v_t + Hbar(z, Dv) = 0 from `initial` up to t_end by explicit
/// Lax-Friedrichs steps. An explicit dt above the CFL step throws CflError.
EffectiveSolve solve_effective_evolutive(const EffectiveTable& table, const ScalarField& initial,
                                         double t_end, const EffectiveOptions& options = {});

struct StabilizationReport {
  Vec z;
  double h_bar = 0.0;      // min_x h(z, x) on the fast grid
  double w_min = 0.0;      // of w(., t_end)
  double w_max = 0.0;
  double deviation = 0.0;  // max |w(., t_end) - h_bar|
  double t_end = 0.0;
  bool agrees = false;
};

/// hbar(z) = min_x h(z, x), checked against the stabilization run of
/// w_t + 1/2 |sigma D w|^2 = 0 from h(z, .) up to t_end.
StabilizationReport effective_initial_data(const OscillatingSystem& osc, const Vec& z,
                                           const TorusGrid& fast_grid, double t_end = 5.0,
                                           double tolerance = 5e-2);

/// min_x h(z, x) over the fast grid.
double min_over_fast(const OscillatingSystem& osc, const Vec& z, const TorusGrid& fast_grid);

enum class HomogenizationMode { stationary, evolutive };

struct StudyOptions {
  int nodes_per_cell = 16;
  int min_nodes_per_cell = 8;
  int effective_nodes = 128;
  double t_compare = 0.5;
  int fast_nodes = 256;
  int max_range_extensions = 3;
  TableOptions table{};
  DiscountedOptions fine{};
  EffectiveOptions effective{};
};

struct HomogenizationStudy {
  HomogenizationMode mode = HomogenizationMode::stationary;
  std::vector<double> epsilons;
  std::vector<double> errors;
  std::vector<int> fine_sizes;
  double t_compare = 0.0;
  int range_extensions = 0;
  EffectiveTable table;
  ScalarField effective;
};

HomogenizationStudy convergence_study(const OscillatingSystem& osc,
                                      const std::vector<double>& epsilons,
                                      HomogenizationMode mode, const StudyOptions& options = {});

void write_study_csv(const HomogenizationStudy& study, const std::filesystem::path& path);

std::string to_string(HomogenizationMode m);

}  // namespace ergodic
