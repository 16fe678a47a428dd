#include "ergodic/homogenization.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ergodic {

namespace {

Mat sigma_t_sigma(const OscillatingSystem& osc, const Vec& x) {
  const Mat F = osc.fields(x);
  return F * osc.metric(x).llt().solve(F.transpose());
}

std::string describe(const Vec& v) {
  std::ostringstream s;
  s << '(';
  for (int j = 0; j < v.size(); ++j) s << (j ? "," : "") << v[j];
  s << ')';
  return s.str();
}

void check_oscillating(const OscillatingSystem& osc) {
  if (osc.n < 1 || osc.n > kMaxDim || osc.m < 1)
    throw DomainError("oscillating system has invalid dimensions");
  if (!osc.f || !osc.fields || !osc.metric || !osc.g)
    throw DomainError("oscillating system is missing f, F, G or g");
}

}  // namespace

std::string to_string(HomogenizationMode m) {
  return m == HomogenizationMode::stationary ? "stationary" : "evolutive";
}

FrozenData frozen_data(const OscillatingSystem& osc, const Vec& z, const Vec& P) {
  check_oscillating(osc);
  if (z.size() != osc.n || P.size() != osc.n) throw DomainError("z and P must have dimension n");
  FrozenData d;
  d.b_cell = [osc, P](const Vec& x) -> Vec { return osc.f(x) + sigma_t_sigma(osc, x) * P; };
  d.l_cell = [osc, z, P](const Vec& x) {
    return osc.g(z, x) - osc.f(x).dot(P) - 0.5 * P.dot(sigma_t_sigma(osc, x) * P);
  };
  return d;
}

AffineSystem cell_system(const OscillatingSystem& osc, const Vec& z, const Vec& P) {
  check_oscillating(osc);
  if (z.size() != osc.n || P.size() != osc.n) throw DomainError("z and P must have dimension n");
  AffineSystem s;
  s.name = osc.name + "_cell";
  s.n = osc.n;
  s.m = osc.m;
  s.fields = osc.fields;
  s.metric = osc.metric;
  s.control = osc.control;
  if (std::holds_alternative<QuadraticControl>(osc.control)) {
    FrozenData d = frozen_data(osc, z, P);
    s.drift = std::move(d.b_cell);
    s.potential = std::move(d.l_cell);
  } else {
    s.drift = osc.f;
    s.potential = [osc, z, P](const Vec& x) { return osc.g(z, x) - P.dot(osc.f(x)); };
    s.linear_cost = [osc, P](const Vec& x) -> Vec { return -(osc.fields(x).transpose() * P); };
  }
  return s;
}

AffineSystem scaled_system(const OscillatingSystem& osc, double epsilon) {
  check_oscillating(osc);
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double k = 1.0 / epsilon;
  AffineSystem s;
  s.name = osc.name + "_eps";
  s.n = osc.n;
  s.m = osc.m;
  s.drift = [osc, k](const Vec& z) -> Vec { return osc.f(wrap(k * z)); };
  s.fields = [osc, k](const Vec& z) -> Mat { return osc.fields(wrap(k * z)); };
  s.metric = [osc, k](const Vec& z) -> Mat { return osc.metric(wrap(k * z)); };
  s.potential = [osc, k](const Vec& z) { return osc.g(z, wrap(k * z)); };
  s.control = osc.control;
  return s;
}

AffineSystem stabilization_system(const OscillatingSystem& osc) {
  check_oscillating(osc);
  AffineSystem s;
  s.name = osc.name + "_stabil";
  s.n = osc.n;
  s.m = osc.m;
  const int n = osc.n;
  s.drift = [n](const Vec&) -> Vec { return Vec::Zero(n); };
  s.fields = osc.fields;
  s.metric = osc.metric;
  s.potential = [](const Vec&) { return 0.0; };
  s.control = osc.control;
  return s;
}

double effective_hamiltonian(const OscillatingSystem& osc, const Vec& z, const Vec& P,
                             const CellOptions& options) {
  const AffineSystem cell = cell_system(osc, z, P);
  const TorusGrid grid(std::vector<int>(osc.n, options.nodes_per_axis));
  return -lambda_discount(cell, grid, options.deltas, options.discount).lambda_bar;
}

std::size_t EffectiveTable::p_count() const {
  std::size_t c = 1;
  for (int j = 0; j < n; ++j) c *= static_cast<std::size_t>(p_per_axis);
  return c;
}

Vec EffectiveTable::p_sample(std::size_t k) const {
  Vec P(n);
  for (int j = n - 1; j >= 0; --j) {
    P[j] = -p_max + static_cast<double>(k % p_per_axis) * p_spacing();
    k /= p_per_axis;
  }
  return P;
}

double EffectiveTable::operator()(const Vec& z, const Vec& P) const {
  if (z.size() != n || P.size() != n) throw DomainError("table query has the wrong dimension");
  const double dp = p_spacing();
  std::array<int, kMaxDim> p_lo{};
  std::array<double, kMaxDim> p_frac{};
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(P[j]) || std::fabs(P[j]) > p_max * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "gradient component " << P[j] << " outside the table range [" << -p_max << ", "
          << p_max << "]";
      throw RangeError(msg.str(), P[j]);
    }
    const double t = std::clamp((P[j] + p_max) / dp, 0.0, static_cast<double>(p_per_axis - 1));
    int i0 = static_cast<int>(std::floor(t));
    if (i0 > p_per_axis - 2) i0 = p_per_axis - 2;
    p_lo[j] = i0;
    p_frac[j] = t - i0;
  }
  const Stencil zs = make_stencil(z_grid, z);
  const std::size_t pc = p_count();
  double acc = 0.0;
  for (int zc = 0; zc < (1 << n); ++zc) {
    double wz = 1.0;
    for (int j = 0; j < n; ++j) wz *= (zc >> j) & 1 ? zs.frac[j] : 1.0 - zs.frac[j];
    if (wz == 0.0) continue;
    for (int pcn = 0; pcn < (1 << n); ++pcn) {
      double wp = 1.0;
      std::size_t pf = 0;
      for (int j = 0; j < n; ++j) {
        const int bit = (pcn >> j) & 1;
        wp *= bit ? p_frac[j] : 1.0 - p_frac[j];
        pf = pf * p_per_axis + static_cast<std::size_t>(p_lo[j] + bit);
      }
      if (wp == 0.0) continue;
      acc += wz * wp * values[zs.corner[zc] * pc + pf];
    }
  }
  return acc;
}

double EffectiveTable::modulus_violation() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const ModulusSample& m : modulus_check)
    worst = std::max(worst, m.difference - m.omega - 2.0 * cell_tol);
  return modulus_check.empty() ? 0.0 : worst;
}

void analyze_table(const OscillatingSystem& osc, EffectiveTable& t, int modulus_nodes) {
  const int n = t.n;
  const std::size_t Z = t.z_grid.node_count();
  const std::size_t PC = t.p_count();
  const double dp = t.p_spacing();

  // Sampled modulus of continuity of g in z.
  const TorusGrid fast(std::vector<int>(n, modulus_nodes));
  std::vector<std::vector<double>> gz(Z, std::vector<double>(fast.node_count()));
  for (std::size_t i = 0; i < Z; ++i)
    for (std::size_t x = 0; x < fast.node_count(); ++x)
      gz[i][x] = osc.g(t.z_sample(i), fast.coordinates(x));
  std::vector<double> pair_sup(Z * Z, 0.0), dist(Z * Z, 0.0);
  for (std::size_t i = 0; i < Z; ++i)
    for (std::size_t j = 0; j < Z; ++j) {
      double s = 0.0;
      for (std::size_t x = 0; x < fast.node_count(); ++x) s = std::max(s, std::fabs(gz[i][x] - gz[j][x]));
      pair_sup[i * Z + j] = s;
      dist[i * Z + j] = torus_distance(t.z_sample(i), t.z_sample(j));
    }
  auto omega = [&](double r) {
    double w = 0.0;
    for (std::size_t k = 0; k < Z * Z; ++k)
      if (dist[k] <= r * (1.0 + 1e-12)) w = std::max(w, pair_sup[k]);
    return w;
  };

  t.modulus_check.clear();
  for (std::size_t i = 0; i < Z; ++i)
    for (std::size_t j = i + 1; j < Z; ++j) {
      const double w = omega(dist[i * Z + j]);
      for (std::size_t p = 0; p < PC; ++p)
        t.modulus_check.push_back({i, j, p, std::fabs(t.at(i, p) - t.at(j, p)), w});
    }

  t.p_lipschitz.assign(n, 0.0);
  t.convexity_defect = 0.0;
  t.symmetry_defect = 0.0;
  for (std::size_t i = 0; i < Z; ++i)
    for (std::size_t p = 0; p < PC; ++p) {
      std::array<int, kMaxDim> idx{};
      std::size_t r = p, mirror = 0;
      for (int j = n - 1; j >= 0; --j) {
        idx[j] = static_cast<int>(r % t.p_per_axis);
        r /= t.p_per_axis;
      }
      for (int j = 0; j < n; ++j) mirror = mirror * t.p_per_axis + (t.p_per_axis - 1 - idx[j]);
      t.symmetry_defect = std::max(t.symmetry_defect, std::fabs(t.at(i, p) - t.at(i, mirror)));
      std::size_t stride = 1;
      for (int j = n - 1; j >= 0; --j) {
        if (idx[j] + 1 < t.p_per_axis)
          t.p_lipschitz[j] = std::max(t.p_lipschitz[j], std::fabs(t.at(i, p + stride) - t.at(i, p)) / dp);
        if (idx[j] > 0 && idx[j] + 1 < t.p_per_axis) {
          const double defect = 2.0 * t.at(i, p) - t.at(i, p - stride) - t.at(i, p + stride);
          t.convexity_defect = std::max(t.convexity_defect, defect);
        }
        stride *= t.p_per_axis;
      }
    }
}

EffectiveTable effective_table(const OscillatingSystem& osc, const TableOptions& options) {
  check_oscillating(osc);
  if (options.z_per_axis < 4) throw DomainError("need at least 4 z samples per axis");
  if (options.p_per_axis < 2) throw DomainError("need at least 2 P samples per axis");
  if (!(options.p_max > 0.0)) throw DomainError("P range must be positive");

  EffectiveTable t;
  t.n = osc.n;
  t.z_grid = TorusGrid(std::vector<int>(osc.n, options.z_per_axis));
  t.p_per_axis = options.p_per_axis;
  t.p_max = options.p_max;
  t.cell_tol = options.cell_tol;
  const std::size_t Z = t.z_grid.node_count();
  const std::size_t PC = t.p_count();
  t.values.assign(Z * PC, 0.0);

  CellOptions cell = options.cell;
  if (options.mode == SweepMode::parallel) cell.discount.mode = SweepMode::serial;
  const long total = static_cast<long>(Z * PC);
  std::exception_ptr failure;
  long failed_at = -1;
  auto run = [&](long k) {
    const std::size_t zi = static_cast<std::size_t>(k) / PC;
    const std::size_t pi = static_cast<std::size_t>(k) % PC;
    try {
      t.values[k] = effective_hamiltonian(osc, t.z_sample(zi), t.p_sample(pi), cell);
    } catch (...) {
#pragma omp critical(ergodic_table_failure)
      if (!failure || k < failed_at) {
        failure = std::current_exception();
        failed_at = k;
      }
    }
  };
  if (options.mode == SweepMode::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < total; ++k) run(k);
  } else {
    for (long k = 0; k < total; ++k) run(k);
  }
  if (failure) {
    const std::size_t zi = static_cast<std::size_t>(failed_at) / PC;
    const std::size_t pi = static_cast<std::size_t>(failed_at) % PC;
    const std::string where =
        "cell problem at z = " + describe(t.z_sample(zi)) + ", P = " + describe(t.p_sample(pi)) + ": ";
    try {
      std::rethrow_exception(failure);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(where + e.what(), e.last_update());
    } catch (const std::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }
  analyze_table(osc, t, options.modulus_nodes);
  return t;
}

void write_effective_table_csv(const EffectiveTable& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (int j = 0; j < t.n; ++j) out << 'z' << j + 1 << ',';
  for (int j = 0; j < t.n; ++j) out << 'P' << j + 1 << ',';
  out << "Hbar\n" << std::setprecision(17);
  for (std::size_t i = 0; i < t.z_grid.node_count(); ++i)
    for (std::size_t p = 0; p < t.p_count(); ++p) {
      const Vec z = t.z_sample(i), P = t.p_sample(p);
      for (int j = 0; j < t.n; ++j) out << z[j] << ',';
      for (int j = 0; j < t.n; ++j) out << P[j] << ',';
      out << t.at(i, p) << '\n';
    }
}

int fine_grid_size(double epsilon, int nodes_per_cell) {
  if (!(epsilon > 0.0) || nodes_per_cell < 1) throw DomainError("invalid resolution request");
  return std::max(4, static_cast<int>(std::ceil(nodes_per_cell / epsilon - 1e-9)));
}

namespace {

void check_resolution(const TorusGrid& grid, double epsilon, int min_nodes_per_cell) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  for (int j = 0; j < grid.dim(); ++j)
    if (grid.size(j) * epsilon < min_nodes_per_cell - 1e-9) {
      std::ostringstream msg;
      msg << "grid with " << grid.size(j) << " nodes resolves eps = " << epsilon << " with only "
          << grid.size(j) * epsilon << " nodes per cell (need " << min_nodes_per_cell << ")";
      throw DomainError(msg.str());
    }
}

}  // namespace

ScalarField solve_oscillating_stationary(const OscillatingSystem& osc, double epsilon,
                                         const TorusGrid& fine_grid,
                                         const DiscountedOptions& options, int min_nodes_per_cell) {
  check_resolution(fine_grid, epsilon, min_nodes_per_cell);
  return solve_discounted(scaled_system(osc, epsilon), 1.0, fine_grid, options).w;
}

ScalarField solve_oscillating_evolutive(const OscillatingSystem& osc, double epsilon,
                                        const TorusGrid& fine_grid, double t_end,
                                        int min_nodes_per_cell, SweepMode mode) {
  check_resolution(fine_grid, epsilon, min_nodes_per_cell);
  if (!osc.h) throw DomainError("oscillating system has no initial datum h");
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  const AffineSystem sys = scaled_system(osc, epsilon);
  const double k = 1.0 / epsilon;
  const ScalarField h0 =
      sample_field(fine_grid, [&](const Vec& z) { return osc.h(z, wrap(k * z)); });
  const double dt = aligned_dt({t_end}, TransitionOperator(sys, fine_grid, 0.0).dt());
  const LaxOleinikSemigroup T(sys, fine_grid, dt, mode);
  return T.advance(h0, aligned_steps(t_end, dt));
}

namespace {

struct LfSetup {
  std::vector<Vec> coords;
  std::vector<double> theta;
  double rate = 0.0;  // sum theta_j / h_j
};

LfSetup lf_setup(const EffectiveTable& table, const TorusGrid& grid) {
  if (grid.dim() != table.n) throw DomainError("grid and table dimensions differ");
  if (table.p_lipschitz.size() != static_cast<std::size_t>(table.n))
    throw DomainError("table has no P-Lipschitz estimate");
  LfSetup s;
  s.theta = table.p_lipschitz;
  s.coords.resize(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) s.coords[i] = grid.coordinates(i);
  for (int j = 0; j < grid.dim(); ++j) s.rate += s.theta[j] / grid.spacing(j);
  return s;
}

void lf_apply(const EffectiveTable& table, const TorusGrid& grid, const LfSetup& s,
              std::span<const double> v, std::span<double> out, SweepMode mode) {
  const int n = grid.dim();
  const kernels::NodeHamiltonian H = [&](std::size_t i, const double* p) {
    return table(s.coords[i], Eigen::Map<const Vec>(p, n));
  };
  if (mode == SweepMode::parallel)
    kernels::lf_hamiltonian_omp(grid, v, s.theta, H, out);
  else
    kernels::lf_hamiltonian_serial(grid, v, s.theta, H, out);
}

double max_gradient(const ScalarField& v) {
  double g = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) g = std::max(g, gradient_fd(v, i).lpNorm<Eigen::Infinity>());
  return g;
}

}  // namespace

EffectiveSolve solve_effective_stationary(const EffectiveTable& table, const TorusGrid& grid,
                                          const EffectiveOptions& options) {
  const LfSetup s = lf_setup(table, grid);
  const double dtau = 0.9 / (1.0 + s.rate);
  std::vector<double> v(grid.node_count());
  const Vec zero = Vec::Zero(grid.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -table(s.coords[i], zero);
  std::vector<double> numH(v.size());
  const FixedPointStats stats = iterate_monotone_fixed_point(
      v, 1.0 - dtau, options.tol * dtau, options.max_iter, true, false,
      [&](std::span<const double> in, std::span<double> out) {
        lf_apply(table, grid, s, in, numH, options.mode);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - dtau * (in[i] + numH[i]);
      });
  EffectiveSolve r;
  r.v = ScalarField(grid, std::move(v));
  r.iterations = stats.iterations;
  r.dt = dtau;
  r.max_gradient = max_gradient(r.v);
  return r;
}

EffectiveSolve solve_effective_evolutive(const EffectiveTable& table, const ScalarField& initial,
                                         double t_end, const EffectiveOptions& options) {
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  const LfSetup s = lf_setup(table, initial.grid);
  double dt = options.dt;
  if (dt > 0.0) {
    if (dt * s.rate > 1.0) {
      std::ostringstream msg;
      msg << "Lax-Friedrichs step " << dt << " exceeds the CFL bound " << 1.0 / s.rate;
      throw CflError(msg.str());
    }
  } else {
    dt = s.rate > 0.0 ? 0.9 / s.rate : t_end;
  }
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  dt = t_end / static_cast<double>(steps);

  std::vector<double> v = initial.values, numH(v.size());
  for (long k = 0; k < steps; ++k) {
    lf_apply(table, initial.grid, s, v, numH, options.mode);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dt * numH[i];
  }
  EffectiveSolve r;
  r.v = ScalarField(initial.grid, std::move(v));
  r.iterations = steps;
  r.dt = dt;
  r.max_gradient = max_gradient(r.v);
  return r;
}

double min_over_fast(const OscillatingSystem& osc, const Vec& z, const TorusGrid& fast_grid) {
  if (!osc.h) throw DomainError("oscillating system has no initial datum h");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fast_grid.node_count(); ++i)
    m = std::min(m, osc.h(z, fast_grid.coordinates(i)));
  return m;
}

StabilizationReport effective_initial_data(const OscillatingSystem& osc, const Vec& z,
                                           const TorusGrid& fast_grid, double t_end,
                                           double tolerance) {
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  StabilizationReport rep;
  rep.z = z;
  rep.t_end = t_end;
  rep.h_bar = min_over_fast(osc, z, fast_grid);
  const AffineSystem sys = stabilization_system(osc);
  const ScalarField w0 = sample_field(fast_grid, [&](const Vec& x) { return osc.h(z, x); });
  const double dt = aligned_dt({t_end}, TransitionOperator(sys, fast_grid, 0.0).dt());
  const LaxOleinikSemigroup T(sys, fast_grid, dt);
  const ScalarField w = T.advance(w0, aligned_steps(t_end, dt));
  rep.w_min = w.min();
  rep.w_max = w.max();
  rep.deviation = std::max(std::fabs(rep.w_max - rep.h_bar), std::fabs(rep.w_min - rep.h_bar));
  rep.agrees = rep.deviation <= tolerance;
  return rep;
}

HomogenizationStudy convergence_study(const OscillatingSystem& osc,
                                      const std::vector<double>& epsilons,
                                      HomogenizationMode mode, const StudyOptions& options) {
  if (epsilons.empty()) throw DomainError("epsilon list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw DomainError("epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw DomainError("epsilons must decrease strictly");
  }
  if (options.nodes_per_cell < options.min_nodes_per_cell)
    throw DomainError("nodes_per_cell is below the resolution minimum");
  if (mode == HomogenizationMode::evolutive && !osc.h)
    throw DomainError("evolutive study needs an initial datum h");
  if (mode == HomogenizationMode::evolutive && options.t_compare < 0.25)
    throw DomainError("evolutive comparisons are made at t >= 0.25, past the initial layer");

  HomogenizationStudy study;
  study.mode = mode;
  study.epsilons = epsilons;
  study.t_compare = mode == HomogenizationMode::evolutive ? options.t_compare : 0.0;

  const TorusGrid eff_grid(std::vector<int>(osc.n, options.effective_nodes));
  ScalarField initial;
  if (mode == HomogenizationMode::evolutive) {
    const TorusGrid fast(std::vector<int>(osc.n, options.fast_nodes));
    initial = sample_field(eff_grid, [&](const Vec& z) { return min_over_fast(osc, z, fast); });
  }

  TableOptions topt = options.table;
  for (int attempt = 0;; ++attempt) {
    study.table = effective_table(osc, topt);
    try {
      study.effective = mode == HomogenizationMode::stationary
                            ? solve_effective_stationary(study.table, eff_grid, options.effective).v
                            : solve_effective_evolutive(study.table, initial, options.t_compare,
                                                        options.effective)
                                  .v;
      break;
    } catch (const RangeError& e) {
      if (attempt >= options.max_range_extensions) throw;
      const double dp = 2.0 * topt.p_max / (topt.p_per_axis - 1);
      topt.p_max = std::max(1.5 * topt.p_max, 1.25 * std::fabs(e.offending()));
      topt.p_per_axis = static_cast<int>(std::ceil(2.0 * topt.p_max / dp)) + 1;
      study.range_extensions = attempt + 1;
    }
  }

  for (double eps : epsilons) {
    const int N = fine_grid_size(eps, options.nodes_per_cell);
    const TorusGrid fine(std::vector<int>(osc.n, N));
    const ScalarField v_eps =
        mode == HomogenizationMode::stationary
            ? solve_oscillating_stationary(osc, eps, fine, options.fine, options.min_nodes_per_cell)
            : solve_oscillating_evolutive(osc, eps, fine, options.t_compare,
                                          options.min_nodes_per_cell, options.fine.mode);
    double err = 0.0;
    for (std::size_t i = 0; i < fine.node_count(); ++i)
      err = std::max(err, std::fabs(v_eps[i] - interpolate(study.effective, fine.coordinates(i))));
    study.errors.push_back(err);
    study.fine_sizes.push_back(N);
  }
  return study;
}

void write_study_csv(const HomogenizationStudy& study, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epsilon,error\n" << std::setprecision(17);
  for (std::size_t i = 0; i < study.epsilons.size(); ++i)
    out << study.epsilons[i] << ',' << study.errors[i] << '\n';
}

}  // namespace ergodic
