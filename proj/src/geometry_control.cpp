#include "ergodic/geometry_control.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ergodic {

namespace {

Mat jacobian(const VectorFieldFn& f, const Vec& x, double h) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

int numerical_rank(const Mat& M, double tol) {
  if (M.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s[0] > 0.0)) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > tol * s[0]) ++r;
  return r;
}

}  // namespace

Vec lie_bracket(const VectorFieldFn& f, const VectorFieldFn& g, const Vec& x, double h_fd) {
  if (!(h_fd > 0.0)) throw DomainError("finite-difference step must be positive");
  return jacobian(g, x, h_fd) * f(x) - jacobian(f, x, h_fd) * g(x);
}

VectorFieldFn control_field(const AffineSystem& sys, int j) {
  if (j < 0 || j >= sys.m) throw DomainError("control field index out of range");
  const MatrixFieldFn F = sys.fields;
  return [F, j](const Vec& x) -> Vec { return F(x).col(j); };
}

std::vector<Vec> sbg_sample_points(int n, int per_axis) {
  if (n < 1 || n > kMaxDim) throw DomainError("state dimension must be 1, 2 or 3");
  if (per_axis < 1) throw DomainError("need at least one sample per axis");
  std::size_t count = 1;
  for (int j = 0; j < n; ++j) count *= static_cast<std::size_t>(per_axis);
  std::vector<Vec> pts;
  for (std::size_t k = 0; k < count; ++k) {
    Vec x(n);
    std::size_t r = k;
    for (int j = n - 1; j >= 0; --j) {
      x[j] = static_cast<double>(r % per_axis) / per_axis;
      r /= per_axis;
    }
    pts.push_back(x);
  }
  return pts;
}

BracketReport check_sbg(const AffineSystem& sys, int order_max,
                        const std::vector<Vec>& sample_points, double tol, double h_fd) {
  if (order_max < 1) throw DomainError("order_max must be >= 1");
  if (!(tol > 0.0)) throw DomainError("rank tolerance must be positive");
  BracketReport rep;
  rep.order_max = order_max;
  rep.tolerance = tol;
  rep.sample_points = sample_points;

  std::vector<VectorFieldFn> base;
  for (int j = 0; j < sys.m; ++j) base.push_back(control_field(sys, j));

  rep.generated = !sample_points.empty();
  for (const Vec& x : sample_points) {
    if (x.size() != sys.n) throw DomainError("sample point has the wrong dimension");
    const Mat F = sys.fields(x);
    if (F.rows() != sys.n || F.cols() != sys.m || !F.allFinite())
      throw DomainError("control fields cannot be evaluated at a sample point");

    std::vector<VectorFieldFn> level = base;
    Mat columns = F;
    int rank = numerical_rank(columns, tol);
    int reached = rank == sys.n ? 1 : 0;
    for (int depth = 2; depth <= order_max && rank < sys.n; ++depth) {
      std::vector<VectorFieldFn> next;
      for (const VectorFieldFn& fi : base) {
        for (const VectorFieldFn& B : level) {
          VectorFieldFn br = [fi, B, h_fd](const Vec& y) { return lie_bracket(fi, B, y, h_fd); };
          const Vec v = br(x);
          if (!v.allFinite()) throw DomainError("bracket evaluation produced non-finite values");
          columns.conservativeResize(Eigen::NoChange, columns.cols() + 1);
          columns.col(columns.cols() - 1) = v;
          next.push_back(std::move(br));
        }
      }
      level = std::move(next);
      rank = numerical_rank(columns, tol);
      if (rank == sys.n) reached = depth;
    }
    rep.rank_at_point.push_back(rank);
    rep.order_at_point.push_back(reached);
    if (rank != sys.n) rep.generated = false;
    rep.generated_order = std::max(rep.generated_order, reached);
  }
  if (!rep.generated) rep.generated_order = 0;
  return rep;
}

std::vector<std::size_t> strided_nodes(const TorusGrid& grid, std::size_t count) {
  const std::size_t N = grid.node_count();
  std::vector<std::size_t> out;
  if (count == 0) return out;
  if (count >= N) {
    for (std::size_t i = 0; i < N; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t k = 0; k < count; ++k) out.push_back(k * N / count);
  return out;
}

namespace {

struct Graph {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> edges;
};

// Breadth-first search is Dijkstra for uniform edge weights.
std::vector<long> hop_distances(const Graph& g, std::size_t source, long max_hops) {
  std::vector<long> dist(g.offsets.size() - 1, -1);
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(source)}, next;
  dist[source] = 0;
  for (long d = 1; d <= max_hops && !frontier.empty(); ++d) {
    next.clear();
    for (std::uint32_t u : frontier)
      for (std::size_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
        const std::uint32_t v = g.edges[e];
        if (dist[v] < 0) {
          dist[v] = d;
          next.push_back(v);
        }
      }
    frontier.swap(next);
  }
  return dist;
}

}  // namespace

TimeTable minimal_time_table(const AffineSystem& sys, const TorusGrid& grid,
                             const std::vector<std::size_t>& sources,
                             const std::vector<std::size_t>& targets_in,
                             const ReachOptions& options) {
  if (!(options.K > 0.0)) throw DomainError("control radius K must be positive");
  if (!(options.horizon > 0.0)) throw DomainError("horizon must be positive");
  if (!(options.control_spacing > 0.0)) throw DomainError("control spacing must be positive");
  if (options.dt < 0.0) throw DomainError("dt must be positive");
  if (sys.n != grid.dim()) throw DomainError("system and grid dimensions differ");
  for (std::size_t s : sources)
    if (s >= grid.node_count()) throw DomainError("source node out of range");
  std::vector<std::size_t> targets = targets_in;
  if (targets.empty()) targets = strided_nodes(grid, grid.node_count());
  for (std::size_t t : targets)
    if (t >= grid.node_count()) throw DomainError("target node out of range");

  const std::vector<Vec> controls = control_lattice(sys.m, options.K, options.control_spacing);
  double diag = 0.0;
  for (int j = 0; j < grid.dim(); ++j) diag += grid.spacing(j) * grid.spacing(j);
  diag = std::sqrt(diag);

  const std::size_t N = grid.node_count();
  std::vector<Vec> coords(N);
  double max_speed = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    coords[i] = grid.coordinates(i);
    for (const Vec& a : controls) max_speed = std::max(max_speed, dynamics(sys, coords[i], a).norm());
  }

  TimeTable tab;
  tab.grid = grid;
  tab.sources = sources;
  tab.targets = targets;
  tab.K_used = options.K;
  tab.horizon = options.horizon;
  tab.snap_error = 0.5 * diag;
  tab.dt = options.dt > 0.0 ? options.dt : (max_speed > 0.0 ? diag / max_speed : options.horizon);
  if (tab.dt * max_speed < diag) {
    std::ostringstream msg;
    msg << "dt * max speed = " << tab.dt * max_speed << " is below the grid diagonal " << diag
        << "; slow edges snap back to their node";
    tab.warnings.push_back(msg.str());
  }

  Graph g;
  g.offsets.assign(N + 1, 0);
  std::vector<std::uint32_t> local;
  for (std::size_t i = 0; i < N; ++i) {
    local.clear();
    for (const Vec& a : controls) {
      const Vec y = coords[i] + tab.dt * dynamics(sys, coords[i], a);
      const std::size_t j = grid.nearest_node(y);
      if (j != i) local.push_back(static_cast<std::uint32_t>(j));
    }
    std::sort(local.begin(), local.end());
    local.erase(std::unique(local.begin(), local.end()), local.end());
    g.edges.insert(g.edges.end(), local.begin(), local.end());
    g.offsets[i + 1] = g.edges.size();
  }

  const long max_hops = static_cast<long>(std::floor(options.horizon / tab.dt + 1e-9));
  const std::size_t T = targets.size();
  tab.t_sharp.assign(sources.size() * T, std::numeric_limits<double>::infinity());
  const long S = static_cast<long>(sources.size());
  auto run = [&](long s) {
    const std::vector<long> dist = hop_distances(g, sources[s], max_hops);
    for (std::size_t t = 0; t < T; ++t)
      if (dist[targets[t]] >= 0) tab.t_sharp[s * T + t] = dist[targets[t]] * tab.dt;
  };
  if (options.mode == SweepMode::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < S; ++s) run(s);
  } else {
    for (long s = 0; s < S; ++s) run(s);
  }

  for (std::size_t s = 0; s < sources.size(); ++s)
    for (std::size_t t = 0; t < T; ++t) {
      const double v = tab.t_sharp[s * T + t];
      if (std::isfinite(v))
        tab.S = std::max(tab.S, v);
      else
        tab.unreachable.emplace_back(sources[s], targets[t]);
    }
  return tab;
}

BtcResult btc_bound(const TimeTable& table) {
  BtcResult r;
  r.unreachable = table.unreachable;
  r.btc = table.unreachable.empty() && !table.t_sharp.empty();
  r.S = table.S;
  return r;
}

std::vector<KSweepStep> btc_sweep(const AffineSystem& sys, const TorusGrid& grid,
                                  const std::vector<std::size_t>& sources,
                                  const std::vector<std::size_t>& targets,
                                  std::vector<double> K_values, ReachOptions options) {
  std::sort(K_values.begin(), K_values.end());
  std::vector<KSweepStep> out;
  for (double K : K_values) {
    options.K = K;
    const TimeTable tab = minimal_time_table(sys, grid, sources, targets, options);
    out.push_back({K, btc_bound(tab)});
    if (out.back().result.btc) break;
  }
  return out;
}

void write_time_table_csv(const TimeTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "src,dst,t_sharp\n" << std::setprecision(17);
  for (std::size_t s = 0; s < table.sources.size(); ++s)
    for (std::size_t t = 0; t < table.targets.size(); ++t) {
      out << table.sources[s] << ',' << table.targets[t] << ',';
      const double v = table.at(s, t);
      if (std::isfinite(v))
        out << v;
      else
        out << "inf";
      out << '\n';
    }
}

}  // namespace ergodic
