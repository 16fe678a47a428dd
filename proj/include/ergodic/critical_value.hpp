#pragma once

#include "ergodic/discounted_solver.hpp"
#include "ergodic/lax_oleinik.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ergodic {

enum class CriticalMethod { discount, longtime };

std::string to_string(CriticalMethod m);

/// One point of a vanishing-discount schedule (parameter = delta) or of a
/// long-time run (parameter = t).
struct ScheduleSample {
  double parameter = 0.0;
  double mean = 0.0;  // mean of delta w_delta, or w(t)/t
  double osc = 0.0;   // osc of delta w_delta, or of w(t)/t
  long iterations = 0;
  double sup_residual = 0.0;
};

struct CriticalEstimate {
  double lambda_bar = 0.0;
  CriticalMethod method = CriticalMethod::discount;
  std::vector<ScheduleSample> diagnostics;
  std::optional<double> agreement_gap;
  /// Discount: log-log slope of osc(delta w) against delta (NaN if osc vanishes).
  double osc_slope = 0.0;
  bool osc_decreasing = true;
  /// Longtime: max - min of the per-node slopes.
  double slope_spread = 0.0;
  double dt = 0.0;
  /// w at the smallest delta (discount) or w(., t2) (longtime).
  ScalarField last_field;
  double last_parameter = 0.0;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Intercept at x = 0 of the least-squares line through (x_i, y_i).
double linear_extrapolation(const std::vector<double>& x, const std::vector<double>& y);

/// lambda = linear-in-delta extrapolation of mean(delta w_delta) over the last
/// three schedule entries. The schedule must be strictly decreasing, >= 3 values.
CriticalEstimate lambda_discount(const AffineSystem& sys, const TorusGrid& grid,
                                 const std::vector<double>& delta_schedule,
                                 const DiscountedOptions& options = {});

/// lambda = mean over nodes of (w(x,t2) - w(x,t1)) / (t2 - t1) with w = T_t w0.
CriticalEstimate lambda_longtime(const AffineSystem& sys, const ScalarField& w0, double t1,
                                 double t2, double dt = 0.0,
                                 SweepMode mode = SweepMode::parallel);

struct Corrector {
  double delta = 0.0;
  std::size_t origin = 0;
  /// v = w_delta - w_delta(origin)
  ScalarField v;
  /// u = w_delta - lambda / delta, when lambda is supplied
  std::optional<ScalarField> u;
};

Corrector corrector_discount(const ScalarField& w_delta, double delta,
                             std::optional<double> lambda_bar = std::nullopt,
                             std::size_t origin = 0);
Corrector corrector_discount(const AffineSystem& sys, const TorusGrid& grid, double delta,
                             std::optional<double> lambda_bar = std::nullopt,
                             const DiscountedOptions& options = {}, std::size_t origin = 0);

struct WeakKamOptions {
  double dt = 0.0;  // <= 0: automatic, aligned with check_times
  /// Stop once the largest increase per sweep is below tol * dt.
  double tol = 1e-3;
  double t_max = 200.0;
  std::vector<double> check_times{0.25, 0.5, 1.0};
  /// Allowed growth max(chi - w_start); <= 0 uses max(1, 2 osc(w_start)).
  double growth_bound = 0.0;
  SweepMode mode = SweepMode::parallel;
};

struct WeakKamSolution {
  ScalarField chi;
  double lambda_bar = 0.0;
  double dt = 0.0;
  /// (t, ||T_t chi - chi - lambda t||_inf)
  std::vector<std::pair<double, double>> fixed_point_residuals;
  long monotone_iterations = 0;
  bool nondecreasing = true;
  double growth = 0.0;
  double growth_bound = 0.0;
  bool bounded = true;
  /// Nodes where chi differs from the starting field.
  std::size_t changed_nodes = 0;
  double last_rate = 0.0;
};

/// chi <- max(chi, T_dt chi - lambda dt) from w_start until the per-sweep
/// increase is below tol dt. Throws ConvergenceError after t_max with the
/// growth rate (lambda underestimated).
WeakKamSolution weak_kam_fixed_point(const AffineSystem& sys, double lambda_bar,
                                     const ScalarField& w_start,
                                     const WeakKamOptions& options = {});

/// ||T_t chi - chi - lambda t||_inf for each t, on the semigroup's step.
std::vector<std::pair<double, double>> fixed_point_residuals(const LaxOleinikSemigroup& T,
                                                             const ScalarField& chi,
                                                             double lambda_bar,
                                                             const std::vector<double>& times);

struct CriticalResidualReport {
  ScalarField r;
  double sub_defect = 0.0;    // sup of r+ over checked nodes
  double super_defect = 0.0;  // sup of r- over checked nodes
  double sup_all = 0.0;       // sup |r| over every node
  std::size_t checked_nodes = 0;
};

/// r(x) = lambda + H(x, gradient_fd(chi)). Nodes within `exclusion_nodes`
/// grid spacings of a point in `kinks` are left out of the defects.
CriticalResidualReport check_critical_residual(const AffineSystem& sys, const ScalarField& chi,
                                               double lambda_bar,
                                               const std::vector<Vec>& kinks = {},
                                               double exclusion_nodes = 0.0);

struct RefinementLevel {
  TorusGrid grid;
  double lambda_bar = 0.0;
  CriticalResidualReport report;
  WeakKamSolution weak_kam;
};

/// Runs discount estimate, corrector and weak-KAM fixed point on `levels`
/// successively doubled grids and reports the critical residual on each.
std::vector<RefinementLevel> critical_residual_refinement(
    const AffineSystem& sys, const TorusGrid& base, int levels,
    const std::vector<double>& delta_schedule, const DiscountedOptions& discount,
    const WeakKamOptions& weak_kam, const std::vector<Vec>& kinks, double exclusion_nodes);

}  // namespace ergodic
