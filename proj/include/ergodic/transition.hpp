#pragma once

#include "ergodic/kernels.hpp"
#include "ergodic/system_model.hpp"

#include <span>
#include <vector>

namespace ergodic {

/// Fraction of a cell travelled per step by the fastest sampled control when
/// the time step is chosen automatically.
constexpr double kDefaultCourant = 0.5;

/// Discrete dynamic-programming operator of an AffineSystem on a grid:
///
///   (S_beta w)(x) = min_a { dt L(x,a) + beta I[w](x + dt (-b(x) - F(x) a)) }
///
/// over the scheme control samples. beta = 1 gives the Lax-Oleinik step,
/// beta = 1 - delta dt the discounted update.
class TransitionOperator {
 public:
  /// dt <= 0 selects 0.5 h_min / max speed. An explicit dt moving more than
  /// one cell along some axis throws CflError.
  TransitionOperator(const AffineSystem& sys, const TorusGrid& grid, double dt = 0.0);
  TransitionOperator(const AffineSystem& sys, const TorusGrid& grid, double dt,
                     std::vector<Vec> controls);

  const TorusGrid& grid() const { return grid_; }
  double dt() const { return dt_; }
  double max_speed() const { return max_speed_; }
  double control_radius() const { return control_radius_; }
  const std::vector<Vec>& controls() const { return controls_; }
  const TransitionTable& table() const { return table_; }

  void apply(std::span<const double> in, std::span<double> out, double discount,
             SweepMode mode = SweepMode::parallel) const;
  void apply_gauss_seidel(std::span<double> w, double discount) const;

  /// Largest time step satisfying the one-cell bound along every axis.
  static double max_stable_dt(const AffineSystem& sys, const TorusGrid& grid,
                              const std::vector<Vec>& controls);

 private:
  void build(const AffineSystem& sys, double dt);

  TorusGrid grid_;
  std::vector<Vec> controls_;
  TransitionTable table_;
  double dt_ = 0.0;
  double max_speed_ = 0.0;
  double control_radius_ = 0.0;
};

}  // namespace ergodic
