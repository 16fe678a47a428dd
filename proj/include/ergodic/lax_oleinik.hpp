#pragma once

#include "ergodic/transition.hpp"

#include <vector>

namespace ergodic {

/// Snapshots of w(., t) = T_t w0 at the recorded times.
struct Evolution {
  std::vector<double> times;
  std::vector<ScalarField> snapshots;
  double dt = 0.0;
};

/// Discrete forward Lax-Oleinik semigroup with a fixed step:
///   (T_dt phi)(x) = min_a { dt L(x,a) + phi(x + dt(-b(x) - F(x)a)) }.
class LaxOleinikSemigroup {
 public:
  LaxOleinikSemigroup(const AffineSystem& sys, const TorusGrid& grid, double dt = 0.0,
                      SweepMode mode = SweepMode::parallel);

  double dt() const { return op_.dt(); }
  const TransitionOperator& op() const { return op_; }

  ScalarField step(const ScalarField& phi) const;
  /// T_{steps dt} phi.
  ScalarField advance(ScalarField phi, long steps) const;
  void step_into(std::span<const double> in, std::span<double> out) const;

 private:
  TransitionOperator op_;
  SweepMode mode_;
};

/// One semigroup step; builds the operator on phi's grid.
ScalarField semigroup_step(const AffineSystem& sys, const ScalarField& phi, double dt);

/// Number of steps of size dt covering `t`; throws when t is not a multiple
/// of dt (relative tolerance 1e-9).
long aligned_steps(double t, double dt);

/// Largest dt <= dt_max for which every time in `times` is a multiple of dt.
/// The first entry fixes the step; the others must be integer multiples of it.
double aligned_dt(const std::vector<double>& times, double dt_max);

/// w(., t) for t up to t_end. The step is the largest one below the
/// automatic/explicit dt that divides t_end; a snapshot is kept every
/// `record_every` steps plus the final time.
Evolution evolve(const AffineSystem& sys, const ScalarField& w0, double t_end, long record_every,
                 double dt = 0.0, SweepMode mode = SweepMode::parallel);

/// Writes snapshot_<k>.csv files and index.csv (`snapshot,time,file`).
void write_evolution(const Evolution& ev, const std::filesystem::path& dir);

}  // namespace ergodic
