#include "ergodic/discounted_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ergodic {

FixedPointStats iterate_monotone_fixed_point(
    std::vector<double>& w, double beta, double stop_update, long max_iter, bool accelerate,
    bool record, const std::function<void(std::span<const double>, std::span<double>)>& step) {
  if (!(beta < 1.0) || !(beta >= 0.0)) throw DomainError("contraction factor must lie in [0,1)");
  const double amplify = beta / (1.0 - beta);
  std::vector<double> next(w.size());
  FixedPointStats stats;
  for (long k = 1; k <= max_iter; ++k) {
    step(w, next);
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -dmin;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = next[i] - w[i];
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    const double update = std::max(std::fabs(dmin), std::fabs(dmax));
    if (!std::isfinite(update)) throw ConvergenceError("fixed-point iteration diverged", update);
    if (record) stats.updates.push_back(update);
    if (accelerate) {
      const double shift = amplify * 0.5 * (dmin + dmax);
      for (double& v : next) v += shift;
    }
    w.swap(next);
    stats.iterations = k;
    stats.last_update = update;
    if (update <= stop_update) return stats;
  }
  std::ostringstream msg;
  msg << "no convergence after " << max_iter << " sweeps (last update " << stats.last_update
      << ", target " << stop_update << ")";
  throw ConvergenceError(msg.str(), stats.last_update);
}

DiscountedSolve solve_discounted(const AffineSystem& sys, double delta, const TorusGrid& grid,
                                 const DiscountedOptions& options) {
  const TransitionOperator op(sys, grid, options.dt);
  return solve_discounted(sys, op, delta, options);
}

DiscountedSolve solve_discounted(const AffineSystem& sys, const TransitionOperator& op,
                                 double delta, const DiscountedOptions& options) {
  if (!(delta > 0.0)) throw DomainError("discount rate delta must be positive");
  if (!(options.tol > 0.0)) throw DomainError("tolerance must be positive");
  const double dt = op.dt();
  const double beta = 1.0 - delta * dt;
  if (!(beta > 0.0)) throw DomainError("delta * dt must be below 1");

  DiscountedSolve out;
  out.delta = delta;
  out.dt = dt;
  out.control_radius = op.control_radius();
  std::vector<double> w(op.grid().node_count(), 0.0);
  const double stop = options.tol * delta * dt;

  FixedPointStats stats;
  try {
    if (options.mode == SweepMode::gauss_seidel) {
      std::vector<double> prev(w.size());
      for (long k = 1;; ++k) {
        prev = w;
        op.apply_gauss_seidel(w, beta);
        double update = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) update = std::max(update, std::fabs(w[i] - prev[i]));
        if (options.record_updates) stats.updates.push_back(update);
        stats.iterations = k;
        stats.last_update = update;
        if (update <= stop) break;
        if (k >= options.max_iter)
          throw ConvergenceError("Gauss-Seidel sweeps did not converge", update);
      }
    } else {
      stats = iterate_monotone_fixed_point(
          w, beta, stop, options.max_iter, options.accelerate, options.record_updates,
          [&](std::span<const double> in, std::span<double> o) { op.apply(in, o, beta, options.mode); });
    }
  } catch (const ConvergenceError& e) {
    std::ostringstream msg;
    msg << "discounted solve at delta = " << delta << ": " << e.what();
    throw ConvergenceError(msg.str(), e.last_update());
  }

  out.w = ScalarField(op.grid(), std::move(w));
  out.iterations = stats.iterations;
  out.sup_update = stats.last_update;
  out.sup_residual = stats.last_update / (delta * dt);
  out.updates = std::move(stats.updates);
  out.clip_events = count_clip_events(sys, out.w, out.control_radius);
  return out;
}

ScalarField discounted_update(const TransitionOperator& op, const ScalarField& w, double delta,
                              SweepMode mode) {
  ScalarField out(w.grid);
  op.apply(w.values, out.values, 1.0 - delta * op.dt(), mode);
  return out;
}

ResidualReport residual(const AffineSystem& sys, double delta, const ScalarField& w) {
  ResidualReport r{ScalarField(w.grid), 0.0, 0.0};
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec x = w.grid.coordinates(i);
    r.field[i] = delta * w[i] + hamiltonian(sys, x, gradient_fd(w, i));
    r.sup = std::max(r.sup, std::fabs(r.field[i]));
    sum += std::fabs(r.field[i]);
  }
  r.mean = sum / static_cast<double>(w.size());
  return r;
}

long count_clip_events(const AffineSystem& sys, const ScalarField& w, double radius) {
  if (!sys.is_quadratic()) return 0;
  long count = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec x = w.grid.coordinates(i);
    const Vec p = gradient_fd(w, i);
    Vec rhs = sys.fields(x).transpose() * p;
    if (sys.linear_cost) rhs -= sys.linear_cost(x);
    const Vec a = sys.metric(x).llt().solve(rhs);
    if (a.norm() > radius * (1.0 + 1e-12)) ++count;
  }
  return count;
}

namespace {

// Per-axis bound on |dH/dp_j| for |p| <= P.
std::vector<double> hamiltonian_lipschitz(const AffineSystem& sys, const TorusGrid& grid, double P) {
  std::vector<double> theta(grid.dim(), 0.0);
  const TorusGrid fine = grid.refined(2);
  for (std::size_t i = 0; i < fine.node_count(); ++i) {
    const Vec x = fine.coordinates(i);
    const Vec b = sys.drift(x);
    const Mat F = sys.fields(x);
    const Mat Ginv = sys.metric(x).inverse();
    const Vec q = sys.linear_cost ? sys.linear_cost(x) : Vec::Zero(sys.m);
    double K = 0.0;
    if (const auto* bc = std::get_if<BoundedControl>(&sys.control)) K = bc->radius;
    for (int j = 0; j < grid.dim(); ++j) {
      double bound = std::fabs(b[j]);
      if (sys.is_quadratic()) {
        const Mat A = F * Ginv * F.transpose();
        bound += A.row(j).lpNorm<1>() * P + std::fabs((F * Ginv * q)[j]);
      } else {
        bound += F.row(j).norm() * K;
      }
      theta[j] = std::max(theta[j], bound);
    }
  }
  return theta;
}

}  // namespace

DiscountedSolve solve_discounted_lf(const AffineSystem& sys, double delta, const TorusGrid& grid,
                                    const LaxFriedrichsOptions& options) {
  if (!(delta > 0.0)) throw DomainError("discount rate delta must be positive");
  const double P = options.gradient_bound > 0.0 ? options.gradient_bound
                                                : resolve_control_radius(sys, grid);
  const std::vector<double> theta = hamiltonian_lipschitz(sys, grid, P);
  double rate = delta;
  for (int j = 0; j < grid.dim(); ++j) rate += theta[j] / grid.spacing(j);
  const double dtau = 0.9 / rate;
  const double beta = 1.0 - delta * dtau;

  std::vector<Vec> coords(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) coords[i] = grid.coordinates(i);
  const kernels::NodeHamiltonian H = [&](std::size_t i, const double* p) {
    return hamiltonian(sys, coords[i], Eigen::Map<const Vec>(p, grid.dim()));
  };

  std::vector<double> w(grid.node_count(), 0.0);
  std::vector<double> numH(grid.node_count());
  const auto stats = iterate_monotone_fixed_point(
      w, beta, options.tol * delta * dtau, options.max_iter, true, false,
      [&](std::span<const double> in, std::span<double> out) {
        if (options.mode == SweepMode::parallel)
          kernels::lf_hamiltonian_omp(grid, in, theta, H, numH);
        else
          kernels::lf_hamiltonian_serial(grid, in, theta, H, numH);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - dtau * (delta * in[i] + numH[i]);
      });

  DiscountedSolve out;
  out.delta = delta;
  out.dt = dtau;
  out.control_radius = P;
  out.w = ScalarField(grid, std::move(w));
  out.iterations = stats.iterations;
  out.sup_update = stats.last_update;
  out.sup_residual = stats.last_update / (delta * dtau);
  return out;
}

}  // namespace ergodic
