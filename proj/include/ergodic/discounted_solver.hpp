#pragma once

#include "ergodic/transition.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ergodic {

struct DiscountedOptions {
  double dt = 0.0;  // <= 0: automatic
  /// Target sup-norm distance to the discrete fixed point.
  double tol = 1e-6;
  long max_iter = 50'000'000;
  SweepMode mode = SweepMode::parallel;
  /// Shift each iterate by the midpoint of the MacQueen bounds. Jacobi only.
  bool accelerate = true;
  /// Keep the sup-norm of every update (for contraction diagnostics).
  bool record_updates = false;
};

struct DiscountedSolve {
  double delta = 0.0;
  ScalarField w;
  long iterations = 0;
  double dt = 0.0;
  double control_radius = 0.0;
  /// Last sup-norm update ||Sw - w||.
  double sup_update = 0.0;
  /// Fixed-point error bound sup_update / (delta dt).
  double sup_residual = 0.0;
  /// Nodes whose unconstrained optimal control exceeds the control radius.
  long clip_events = 0;
  std::vector<double> updates;
};

struct ResidualReport {
  ScalarField field;
  double sup = 0.0;
  double mean = 0.0;
};

/// Result of a monotone fixed-point iteration.
struct FixedPointStats {
  long iterations = 0;
  double last_update = 0.0;
  std::vector<double> updates;
};

/// Iterate w <- step(w) for an operator that is monotone and satisfies
/// step(w + c) = step(w) + beta c, until ||step(w) - w|| <= stop_update.
/// With `accelerate`, each iterate is shifted to the midpoint of the
/// MacQueen bounds w + beta/(1-beta) [min d, max d] on the fixed point.
FixedPointStats iterate_monotone_fixed_point(
    std::vector<double>& w, double beta, double stop_update, long max_iter, bool accelerate,
    bool record, const std::function<void(std::span<const double>, std::span<double>)>& step);

/// Solve delta w + H(x, Dw) = 0 by semi-Lagrangian value iteration
///   w(x) <- min_a { dt L(x,a) + (1 - delta dt) I[w](x + dt(-b - F a)) }
/// from w = 0, stopping once the update is below tol delta dt.
DiscountedSolve solve_discounted(const AffineSystem& sys, double delta, const TorusGrid& grid,
                                 const DiscountedOptions& options = {});

/// Same, reusing a prebuilt operator.
DiscountedSolve solve_discounted(const AffineSystem& sys, const TransitionOperator& op,
                                 double delta, const DiscountedOptions& options = {});

/// One Jacobi update of the discounted scheme.
ScalarField discounted_update(const TransitionOperator& op, const ScalarField& w, double delta,
                              SweepMode mode = SweepMode::serial);

/// Nodewise delta w + H(x, gradient_fd(w)).
ResidualReport residual(const AffineSystem& sys, double delta, const ScalarField& w);

/// Nodes where |a*(x, gradient_fd(w))| exceeds `radius`. Zero for bounded controls.
long count_clip_events(const AffineSystem& sys, const ScalarField& w, double radius);

struct LaxFriedrichsOptions {
  double tol = 1e-6;
  long max_iter = 50'000'000;
  /// Gradient bound used for the dissipation; <= 0 uses the control radius.
  double gradient_bound = 0.0;
  SweepMode mode = SweepMode::parallel;
};

/// Monotone Lax-Friedrichs solve of delta w + H(x, Dw) = 0 with the exact
/// Hamiltonian; a cross-check for the semi-Lagrangian scheme.
DiscountedSolve solve_discounted_lf(const AffineSystem& sys, double delta, const TorusGrid& grid,
                                    const LaxFriedrichsOptions& options = {});

}  // namespace ergodic
