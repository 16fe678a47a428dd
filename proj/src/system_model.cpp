#include "ergodic/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ergodic {

namespace {

Vec linear_term(const AffineSystem& sys, const Vec& x) {
  if (sys.linear_cost) return sys.linear_cost(x);
  return Vec::Zero(sys.m);
}

double quadratic_truncation(const AffineSystem& sys) {
  return std::get<QuadraticControl>(sys.control).truncation_radius;
}

}  // namespace

int AffineSystem::control_shells() const {
  return std::visit([](const auto& c) { return c.shells; }, control);
}

void AffineSystem::check_at(const Vec& x) const {
  if (!drift || !fields || !metric || !potential)
    throw DomainError("system '" + name + "' has undefined data fields");
  const Vec b = drift(x);
  const Mat F = fields(x);
  const Mat G = metric(x);
  if (b.size() != n || F.rows() != n || F.cols() != m || G.rows() != m || G.cols() != m)
    throw DomainError("system '" + name + "' has inconsistent dimensions");
  if (!b.allFinite() || !F.allFinite() || !G.allFinite() || !std::isfinite(potential(x)))
    throw DomainError("system '" + name + "' evaluates to non-finite data");
  if ((G - G.transpose()).norm() > 1e-12 * (1.0 + G.norm()))
    throw DomainError("metric G of '" + name + "' is not symmetric");
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success)
    throw DomainError("metric G of '" + name + "' is not positive definite");
}

Mat tau(const AffineSystem& sys, const Vec& x) {
  const Mat Ginv = sys.metric(x).inverse();
  Eigen::LLT<Mat> llt(Ginv);
  if (llt.info() != Eigen::Success) throw DomainError("metric is not positive definite");
  return llt.matrixL();
}

Mat sigma(const AffineSystem& sys, const Vec& x) {
  if (!sys.is_quadratic()) throw DomainError("sigma is defined for quadratic controls only");
  return (sys.fields(x) * tau(sys, x)).transpose();
}

double lagrangian(const AffineSystem& sys, const Vec& x, const Vec& a) {
  return 0.5 * a.dot(sys.metric(x) * a) + linear_term(sys, x).dot(a) + sys.potential(x);
}

Vec dynamics(const AffineSystem& sys, const Vec& x, const Vec& a) {
  return -sys.drift(x) - sys.fields(x) * a;
}

OptimalControl optimal_control(const AffineSystem& sys, const Vec& x, const Vec& p) {
  if (!sys.is_quadratic())
    throw DomainError("closed-form optimal control needs quadratic controls");
  const Vec rhs = sys.fields(x).transpose() * p - linear_term(sys, x);
  OptimalControl out{sys.metric(x).llt().solve(rhs), false};
  const double R = quadratic_truncation(sys);
  const double norm = out.a.norm();
  if (R > 0.0 && norm > R) {
    out.a *= R / norm;
    out.clipped = true;
  }
  return out;
}

double hamiltonian(const AffineSystem& sys, const Vec& x, const Vec& p) {
  const Vec b = sys.drift(x);
  if (sys.is_quadratic()) {
    const Vec r = sys.fields(x).transpose() * p - linear_term(sys, x);
    const Vec s = tau(sys, x).transpose() * r;
    return b.dot(p) + 0.5 * s.squaredNorm() - sys.potential(x);
  }
  const auto& bc = std::get<BoundedControl>(sys.control);
  const Mat F = sys.fields(x);
  const Mat G = sys.metric(x);
  const Vec q = linear_term(sys, x);
  const Vec Fp = F.transpose() * p;
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& a : control_samples(sys.m, bc.radius, bc.shells))
    best = std::max(best, Fp.dot(a) - 0.5 * a.dot(G * a) - q.dot(a));
  return b.dot(p) + best - sys.potential(x);
}

std::vector<Vec> control_samples(int m, double radius, int shells) {
  if (m < 1 || m > 3) throw DomainError("control dimension must be 1, 2 or 3");
  if (!(radius > 0.0) || shells < 1) throw DomainError("control ball needs radius > 0 and shells >= 1");
  std::vector<Vec> out;
  out.push_back(Vec::Zero(m));
  for (int k = 1; k <= shells; ++k) {
    const double r = radius * k / shells;
    if (m == 1) {
      out.push_back(Vec::Constant(1, r));
      out.push_back(Vec::Constant(1, -r));
    } else if (m == 2) {
      const int count = static_cast<int>(std::ceil(2.0 * std::numbers::pi * k));
      for (int j = 0; j < count; ++j) {
        const double th = 2.0 * std::numbers::pi * j / count;
        Vec a(2);
        a << r * std::cos(th), r * std::sin(th);
        out.push_back(a);
      }
    } else {
      // Fibonacci lattice on the sphere of radius r
      const int count = std::max(2, static_cast<int>(std::ceil(4.0 * std::numbers::pi * k * k)));
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (int j = 0; j < count; ++j) {
        const double zc = 1.0 - 2.0 * (j + 0.5) / count;
        const double rho = std::sqrt(std::max(0.0, 1.0 - zc * zc));
        const double th = golden * j;
        Vec a(3);
        a << r * rho * std::cos(th), r * rho * std::sin(th), r * zc;
        out.push_back(a);
      }
    }
  }
  return out;
}

std::vector<Vec> control_lattice(int m, double radius, double spacing) {
  if (m < 1 || m > 3) throw DomainError("control dimension must be 1, 2 or 3");
  if (!(radius > 0.0) || !(spacing > 0.0)) throw DomainError("lattice needs radius, spacing > 0");
  const int k = static_cast<int>(std::floor(radius / spacing + 1e-9));
  std::vector<Vec> out;
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int j = 0; j < m; ++j) {
    lo[j] = -k;
    hi[j] = k;
  }
  const double r2 = radius * radius * (1.0 + 1e-12);
  for (int i0 = lo[0]; i0 <= hi[0]; ++i0)
    for (int i1 = lo[1]; i1 <= hi[1]; ++i1)
      for (int i2 = lo[2]; i2 <= hi[2]; ++i2) {
        Vec a(m);
        const int ids[3] = {i0, i1, i2};
        for (int j = 0; j < m; ++j) a[j] = ids[j] * spacing;
        if (a.squaredNorm() <= r2) out.push_back(a);
      }
  std::stable_sort(out.begin(), out.end(),
                   [](const Vec& a, const Vec& b) { return a.squaredNorm() < b.squaredNorm(); });
  return out;
}

PotentialRange potential_range(const AffineSystem& sys, const TorusGrid& grid) {
  const TorusGrid fine = grid.refined(4);
  PotentialRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < fine.node_count(); ++i) {
    const double v = sys.potential(fine.coordinates(i));
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  return r;
}

double resolve_control_radius(const AffineSystem& sys, const TorusGrid& grid) {
  if (const auto* bc = std::get_if<BoundedControl>(&sys.control)) return bc->radius;
  const double explicit_radius = quadratic_truncation(sys);
  if (explicit_radius > 0.0) return explicit_radius;

  const TorusGrid fine = grid.refined(4);
  double tau_max = 0.0;
  double b_max = 0.0;
  double lmin = std::numeric_limits<double>::infinity();
  double lmax = -lmin;
  for (std::size_t i = 0; i < fine.node_count(); ++i) {
    const Vec x = fine.coordinates(i);
    // spectral norm of tau = sqrt(largest eigenvalue of G^{-1})
    Eigen::SelfAdjointEigenSolver<Mat> eig(sys.metric(x).inverse());
    tau_max = std::max(tau_max, std::sqrt(eig.eigenvalues().maxCoeff()));
    b_max = std::max(b_max, sys.drift(x).norm());
    const double l = sys.potential(x);
    lmin = std::min(lmin, l);
    lmax = std::max(lmax, l);
  }
  return 2.0 * std::max(1.0, tau_max * std::sqrt(2.0 * (lmax - lmin)) + b_max);
}

std::vector<Vec> scheme_controls(const AffineSystem& sys, const TorusGrid& grid) {
  return control_samples(sys.m, resolve_control_radius(sys, grid), sys.control_shells());
}

LipschitzEstimate estimate_lipschitz(const AffineSystem& sys, const TorusGrid& grid) {
  const TorusGrid fine = grid.refined(4);
  LipschitzEstimate est;
  for (std::size_t i = 0; i < fine.node_count(); ++i) {
    const Vec x = fine.coordinates(i);
    const Vec b = sys.drift(x);
    const Mat F = sys.fields(x);
    const double l = sys.potential(x);
    for (int j = 0; j < fine.dim(); ++j) {
      const double h = fine.spacing(j);
      Vec y = x;
      y[j] += h;
      est.drift = std::max(est.drift, (sys.drift(y) - b).norm() / h);
      est.fields = std::max(est.fields, (sys.fields(y) - F).norm() / h);
      est.potential = std::max(est.potential, std::fabs(sys.potential(y) - l) / h);
    }
  }
  return est;
}

}  // namespace ergodic
