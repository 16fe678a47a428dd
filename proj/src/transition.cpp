#include "ergodic/transition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ergodic {

namespace {

struct NodeData {
  Vec x, b, q;
  Mat F, G;
  double l = 0.0;
};

NodeData node_data(const AffineSystem& sys, const TorusGrid& grid, std::size_t i) {
  NodeData d;
  d.x = grid.coordinates(i);
  d.b = sys.drift(d.x);
  d.F = sys.fields(d.x);
  d.G = sys.metric(d.x);
  d.q = sys.linear_cost ? sys.linear_cost(d.x) : Vec::Zero(sys.m);
  d.l = sys.potential(d.x);
  return d;
}

// Largest |velocity_j| over nodes and controls, per axis, and the largest
// Euclidean speed.
std::pair<std::vector<double>, double> speeds(const AffineSystem& sys, const TorusGrid& grid,
                                              const std::vector<Vec>& controls) {
  std::vector<double> axis(grid.dim(), 0.0);
  double speed = 0.0;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const NodeData d = node_data(sys, grid, i);
    for (const Vec& a : controls) {
      const Vec v = -d.b - d.F * a;
      speed = std::max(speed, v.norm());
      for (int j = 0; j < grid.dim(); ++j) axis[j] = std::max(axis[j], std::fabs(v[j]));
    }
  }
  return {axis, speed};
}

}  // namespace

TransitionOperator::TransitionOperator(const AffineSystem& sys, const TorusGrid& grid, double dt)
    : TransitionOperator(sys, grid, dt, scheme_controls(sys, grid)) {}

TransitionOperator::TransitionOperator(const AffineSystem& sys, const TorusGrid& grid, double dt,
                                       std::vector<Vec> controls)
    : grid_(grid), controls_(std::move(controls)) {
  if (sys.n != grid.dim()) throw DomainError("system and grid dimensions differ");
  sys.check_at(grid.coordinates(0));
  if (controls_.empty()) throw DomainError("empty control sample set");
  for (const Vec& a : controls_) control_radius_ = std::max(control_radius_, a.norm());
  build(sys, dt);
}

double TransitionOperator::max_stable_dt(const AffineSystem& sys, const TorusGrid& grid,
                                         const std::vector<Vec>& controls) {
  const auto [axis, speed] = speeds(sys, grid, controls);
  double dt = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.dim(); ++j)
    if (axis[j] > 0.0) dt = std::min(dt, grid.spacing(j) / axis[j]);
  return dt;
}

void TransitionOperator::build(const AffineSystem& sys, double dt) {
  const auto [axis, speed] = speeds(sys, grid_, controls_);
  max_speed_ = speed;
  if (dt <= 0.0) {
    dt_ = speed > 0.0 ? kDefaultCourant * grid_.min_spacing() / speed
                      : kDefaultCourant * grid_.min_spacing();
  } else {
    dt_ = dt;
    for (int j = 0; j < grid_.dim(); ++j) {
      const double cells = dt * axis[j] / grid_.spacing(j);
      if (cells > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "time step " << dt << " moves " << cells << " cells per step along axis " << j
            << " (limit 1)";
        throw CflError(msg.str());
      }
    }
  }

  const int n = grid_.dim();
  const std::size_t corners = std::size_t{1} << n;
  table_.dim = n;
  table_.nodes = grid_.node_count();
  table_.controls = controls_.size();
  const std::size_t entries = table_.nodes * table_.controls;
  table_.corners.resize(entries * corners);
  table_.fracs.resize(entries * n);
  table_.costs.resize(entries);

  for (std::size_t i = 0; i < table_.nodes; ++i) {
    const NodeData d = node_data(sys, grid_, i);
    for (std::size_t j = 0; j < table_.controls; ++j) {
      const Vec& a = controls_[j];
      const std::size_t e = i * table_.controls + j;
      const Vec foot = d.x + dt_ * (-d.b - d.F * a);
      const Stencil s = make_stencil(grid_, foot);
      for (std::size_t k = 0; k < corners; ++k)
        table_.corners[e * corners + k] = static_cast<std::uint32_t>(s.corner[k]);
      for (int k = 0; k < n; ++k) table_.fracs[e * n + k] = s.frac[k];
      table_.costs[e] = dt_ * (0.5 * a.dot(d.G * a) + d.q.dot(a) + d.l);
    }
  }
}

void TransitionOperator::apply(std::span<const double> in, std::span<double> out,
                               double discount, SweepMode mode) const {
  if (mode == SweepMode::gauss_seidel)
    throw DomainError("Gauss-Seidel sweeps are in place; use apply_gauss_seidel");
  sl_sweep(table_, in, out, discount, mode);
}

void TransitionOperator::apply_gauss_seidel(std::span<double> w, double discount) const {
  kernels::sl_sweep_gauss_seidel(table_, w, discount);
}

}  // namespace ergodic
