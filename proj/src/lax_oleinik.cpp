#include "ergodic/lax_oleinik.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ergodic {

LaxOleinikSemigroup::LaxOleinikSemigroup(const AffineSystem& sys, const TorusGrid& grid,
                                         double dt, SweepMode mode)
    : op_(sys, grid, dt), mode_(mode == SweepMode::gauss_seidel ? SweepMode::serial : mode) {}

void LaxOleinikSemigroup::step_into(std::span<const double> in, std::span<double> out) const {
  op_.apply(in, out, 1.0, mode_);
}

ScalarField LaxOleinikSemigroup::step(const ScalarField& phi) const {
  if (!(phi.grid == op_.grid())) throw DomainError("field lives on a different grid");
  ScalarField out(phi.grid);
  step_into(phi.values, out.values);
  return out;
}

ScalarField LaxOleinikSemigroup::advance(ScalarField phi, long steps) const {
  if (!(phi.grid == op_.grid())) throw DomainError("field lives on a different grid");
  std::vector<double> next(phi.size());
  for (long k = 0; k < steps; ++k) {
    step_into(phi.values, next);
    phi.values.swap(next);
  }
  return phi;
}

ScalarField semigroup_step(const AffineSystem& sys, const ScalarField& phi, double dt) {
  return LaxOleinikSemigroup(sys, phi.grid, dt, SweepMode::serial).step(phi);
}

long aligned_steps(double t, double dt) {
  const double ratio = t / dt;
  const long steps = std::lround(ratio);
  if (std::fabs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "time " << t << " is not a multiple of the step " << dt;
    throw DomainError(msg.str());
  }
  return steps;
}

double aligned_dt(const std::vector<double>& times, double dt_max) {
  if (times.empty() || !(times.front() > 0.0)) throw DomainError("alignment times must be positive");
  const double base = times.front();
  const double dt = base / std::ceil(base / dt_max - 1e-12);
  for (double t : times) aligned_steps(t, dt);
  return dt;
}

Evolution evolve(const AffineSystem& sys, const ScalarField& w0, double t_end, long record_every,
                 double dt, SweepMode mode) {
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  if (record_every < 1) throw DomainError("record_every must be >= 1");
  double step = dt;
  if (step <= 0.0) step = TransitionOperator(sys, w0.grid, 0.0).dt();
  step = aligned_dt({t_end}, step);
  const LaxOleinikSemigroup T(sys, w0.grid, step, mode);
  const long steps = aligned_steps(t_end, step);

  Evolution ev;
  ev.dt = step;
  ev.times.push_back(0.0);
  ev.snapshots.push_back(w0);
  ScalarField w = w0;
  std::vector<double> next(w.size());
  for (long k = 1; k <= steps; ++k) {
    T.step_into(w.values, next);
    w.values.swap(next);
    if (k % record_every == 0 || k == steps) {
      ev.times.push_back(k * step);
      ev.snapshots.push_back(w);
    }
  }
  return ev;
}

void write_evolution(const Evolution& ev, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "index.csv");
  if (!index) throw std::runtime_error("cannot write " + (dir / "index.csv").string());
  index << "snapshot,time,file\n" << std::setprecision(17);
  for (std::size_t k = 0; k < ev.snapshots.size(); ++k) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(5) << std::setfill('0') << k << ".csv";
    write_field_csv(ev.snapshots[k], dir / name.str());
    index << k << ',' << ev.times[k] << ',' << name.str() << '\n';
  }
}

}  // namespace ergodic
