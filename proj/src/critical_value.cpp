#include "ergodic/critical_value.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ergodic {

std::string to_string(CriticalMethod m) {
  return m == CriticalMethod::discount ? "discount" : "longtime";
}

double linear_extrapolation(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("extrapolation needs >= 2 matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return my;
  return my - (sxy / sxx) * mx;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxy / sxx;
}

CriticalEstimate lambda_discount(const AffineSystem& sys, const TorusGrid& grid,
                                 const std::vector<double>& delta_schedule,
                                 const DiscountedOptions& options) {
  if (delta_schedule.size() < 3) throw DomainError("delta schedule needs at least 3 values");
  for (std::size_t i = 0; i < delta_schedule.size(); ++i) {
    if (!(delta_schedule[i] > 0.0)) throw DomainError("delta schedule entries must be positive");
    if (i > 0 && !(delta_schedule[i] < delta_schedule[i - 1]))
      throw DomainError("delta schedule must be strictly decreasing");
  }

  const TransitionOperator op(sys, grid, options.dt);
  CriticalEstimate est;
  est.method = CriticalMethod::discount;
  est.dt = op.dt();
  std::vector<double> deltas, means, oscs;
  for (double delta : delta_schedule) {
    DiscountedSolve s = solve_discounted(sys, op, delta, options);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (double v : s.w.values) {
      lo = std::min(lo, delta * v);
      hi = std::max(hi, delta * v);
      sum += delta * v;
    }
    const double mean = sum / static_cast<double>(s.w.size());
    est.diagnostics.push_back({delta, mean, hi - lo, s.iterations, s.sup_residual});
    deltas.push_back(delta);
    means.push_back(mean);
    oscs.push_back(hi - lo);
    est.last_field = std::move(s.w);
    est.last_parameter = delta;
  }

  est.lambda_bar =
      linear_extrapolation({deltas.end() - 3, deltas.end()}, {means.end() - 3, means.end()});
  est.osc_slope = loglog_slope(deltas, oscs);
  for (std::size_t i = 1; i < oscs.size(); ++i)
    if (oscs[i] > oscs[i - 1]) est.osc_decreasing = false;
  return est;
}

CriticalEstimate lambda_longtime(const AffineSystem& sys, const ScalarField& w0, double t1,
                                 double t2, double dt, SweepMode mode) {
  if (!(t1 > 0.0) || !(t2 > t1)) throw DomainError("long-time estimate needs 0 < t1 < t2");
  double step = dt > 0.0 ? dt : TransitionOperator(sys, w0.grid, 0.0).dt();
  step = aligned_dt({t1, t2}, step);
  const LaxOleinikSemigroup T(sys, w0.grid, step, mode);
  const long n1 = aligned_steps(t1, step);
  const long n2 = aligned_steps(t2, step);

  const ScalarField w1 = T.advance(w0, n1);
  ScalarField w2 = T.advance(w1, n2 - n1);

  CriticalEstimate est;
  est.method = CriticalMethod::longtime;
  est.dt = step;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (std::size_t i = 0; i < w0.size(); ++i) {
    const double slope = (w2[i] - w1[i]) / (t2 - t1);
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
    sum += slope;
  }
  est.lambda_bar = sum / static_cast<double>(w0.size());
  est.slope_spread = hi - lo;
  const std::pair<double, const ScalarField*> snapshots[] = {{t1, &w1}, {t2, &w2}};
  for (const auto& [t, w] : snapshots) {
    double a = std::numeric_limits<double>::infinity(), b = -a, s = 0.0;
    for (double v : w->values) {
      a = std::min(a, v / t);
      b = std::max(b, v / t);
      s += v / t;
    }
    est.diagnostics.push_back(
        ScheduleSample{t, s / static_cast<double>(w->size()), b - a, aligned_steps(t, step), 0.0});
  }
  est.last_field = std::move(w2);
  est.last_parameter = t2;
  return est;
}

Corrector corrector_discount(const ScalarField& w_delta, double delta,
                             std::optional<double> lambda_bar, std::size_t origin) {
  if (origin >= w_delta.size()) throw DomainError("normalization node out of range");
  Corrector c;
  c.delta = delta;
  c.origin = origin;
  c.v = w_delta;
  const double ref = w_delta[origin];
  for (double& x : c.v.values) x -= ref;
  c.v[origin] = 0.0;
  if (lambda_bar) {
    ScalarField u = w_delta;
    const double shift = *lambda_bar / delta;
    for (double& x : u.values) x -= shift;
    c.u = std::move(u);
  }
  return c;
}

Corrector corrector_discount(const AffineSystem& sys, const TorusGrid& grid, double delta,
                             std::optional<double> lambda_bar, const DiscountedOptions& options,
                             std::size_t origin) {
  const DiscountedSolve s = solve_discounted(sys, delta, grid, options);
  return corrector_discount(s.w, delta, lambda_bar, origin);
}

std::vector<std::pair<double, double>> fixed_point_residuals(const LaxOleinikSemigroup& T,
                                                             const ScalarField& chi,
                                                             double lambda_bar,
                                                             const std::vector<double>& times) {
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  ScalarField w = chi;
  long done = 0;
  for (double t : sorted) {
    const long steps = aligned_steps(t, T.dt());
    w = T.advance(std::move(w), steps - done);
    done = steps;
    double r = 0.0;
    for (std::size_t i = 0; i < chi.size(); ++i)
      r = std::max(r, std::fabs(w[i] - chi[i] - lambda_bar * t));
    out.emplace_back(t, r);
  }
  return out;
}

WeakKamSolution weak_kam_fixed_point(const AffineSystem& sys, double lambda_bar,
                                     const ScalarField& w_start, const WeakKamOptions& options) {
  if (!(options.tol > 0.0) || !(options.t_max > 0.0))
    throw DomainError("weak KAM iteration needs tol > 0 and t_max > 0");
  double step = options.dt > 0.0 ? options.dt : TransitionOperator(sys, w_start.grid, 0.0).dt();
  if (!options.check_times.empty()) step = aligned_dt(options.check_times, step);
  const LaxOleinikSemigroup T(sys, w_start.grid, step, options.mode);

  WeakKamSolution sol;
  sol.lambda_bar = lambda_bar;
  sol.dt = step;
  sol.growth_bound = options.growth_bound > 0.0
                         ? options.growth_bound
                         : std::max(1.0, 2.0 * w_start.oscillation());

  std::vector<double> chi = w_start.values;
  std::vector<double> next(chi.size());
  const double shift = lambda_bar * step;
  const long max_sweeps = static_cast<long>(std::ceil(options.t_max / step));
  double update = 0.0;
  bool converged = false;
  for (long k = 1; k <= max_sweeps; ++k) {
    T.step_into(chi, next);
    update = 0.0;
    for (std::size_t i = 0; i < chi.size(); ++i) {
      const double candidate = std::max(chi[i], next[i] - shift);
      if (candidate < chi[i]) sol.nondecreasing = false;
      update = std::max(update, candidate - chi[i]);
      next[i] = candidate;
    }
    chi.swap(next);
    sol.monotone_iterations = k;
    if (!std::isfinite(update)) break;
    if (update <= options.tol * step) {
      converged = true;
      break;
    }
  }
  sol.last_rate = update / step;
  if (!converged) {
    double growth = 0.0;
    for (std::size_t i = 0; i < chi.size(); ++i) growth = std::max(growth, chi[i] - w_start[i]);
    std::ostringstream msg;
    msg << "weak KAM iteration did not stabilize by t = " << options.t_max << ": growth "
        << growth << ", current rate " << sol.last_rate
        << " per unit time (lambda likely underestimated)";
    throw ConvergenceError(msg.str(), update);
  }

  sol.chi = ScalarField(w_start.grid, std::move(chi));
  for (std::size_t i = 0; i < w_start.size(); ++i) {
    sol.growth = std::max(sol.growth, sol.chi[i] - w_start[i]);
    if (sol.chi[i] != w_start[i]) ++sol.changed_nodes;
  }
  sol.bounded = sol.chi.all_finite() && sol.growth <= sol.growth_bound;
  sol.fixed_point_residuals = fixed_point_residuals(T, sol.chi, lambda_bar, options.check_times);
  return sol;
}

CriticalResidualReport check_critical_residual(const AffineSystem& sys, const ScalarField& chi,
                                               double lambda_bar, const std::vector<Vec>& kinks,
                                               double exclusion_nodes) {
  CriticalResidualReport rep{ScalarField(chi.grid), 0.0, 0.0, 0.0, 0};
  const double radius = exclusion_nodes * chi.grid.min_spacing() * (1.0 + 1e-9);
  for (std::size_t i = 0; i < chi.size(); ++i) {
    const Vec x = chi.grid.coordinates(i);
    const double r = lambda_bar + hamiltonian(sys, x, gradient_fd(chi, i));
    rep.r[i] = r;
    rep.sup_all = std::max(rep.sup_all, std::fabs(r));
    const bool excluded = std::any_of(kinks.begin(), kinks.end(), [&](const Vec& k) {
      return torus_distance(x, k) <= radius;
    });
    if (excluded) continue;
    ++rep.checked_nodes;
    rep.sub_defect = std::max(rep.sub_defect, std::max(r, 0.0));
    rep.super_defect = std::max(rep.super_defect, std::max(-r, 0.0));
  }
  return rep;
}

std::vector<RefinementLevel> critical_residual_refinement(
    const AffineSystem& sys, const TorusGrid& base, int levels,
    const std::vector<double>& delta_schedule, const DiscountedOptions& discount,
    const WeakKamOptions& weak_kam, const std::vector<Vec>& kinks, double exclusion_nodes) {
  std::vector<RefinementLevel> out;
  TorusGrid grid = base;
  for (int level = 0; level < levels; ++level) {
    const CriticalEstimate est = lambda_discount(sys, grid, delta_schedule, discount);
    const Corrector c = corrector_discount(est.last_field, est.last_parameter, est.lambda_bar);
    RefinementLevel lv;
    lv.grid = grid;
    lv.lambda_bar = est.lambda_bar;
    lv.weak_kam = weak_kam_fixed_point(sys, est.lambda_bar, *c.u, weak_kam);
    lv.report = check_critical_residual(sys, lv.weak_kam.chi, est.lambda_bar, kinks, exclusion_nodes);
    out.push_back(std::move(lv));
    grid = grid.refined(2);
  }
  return out;
}

}  // namespace ergodic
