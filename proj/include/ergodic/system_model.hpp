#pragma once

#include "ergodic/torus_grid.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace ergodic {

using VectorFieldFn = std::function<Vec(const Vec&)>;
using MatrixFieldFn = std::function<Mat(const Vec&)>;
using ScalarFn = std::function<double(const Vec&)>;

/// Compact control set A = closed ball B_m(radius), sampled by `shells`
/// concentric shells around the origin.
struct BoundedControl {
  double radius = 1.0;
  int shells = 16;
};

/// A = R^m with quadratic running cost. Controls are truncated to the ball
/// of `truncation_radius`; a value <= 0 requests the automatic radius.
struct QuadraticControl {
  double truncation_radius = 0.0;
  int shells = 16;
};

using ControlSpec = std::variant<BoundedControl, QuadraticControl>;

/// Control-affine system on the torus together with its running cost
///
///   dynamics   y' = -b(y) - F(y) a
///   cost       L(x, a) = 1/2 a^T G(x) a + q(x) . a + l(x)
///   Hamiltonian H(x, p) = b.p + sup_a { p.F a - L(x, a) }
///
/// With QuadraticControl and q = 0, H(x,p) = b.p + 1/2 |sigma p|^2 - l with
/// sigma = (F tau)^T and G^{-1} = tau tau^T. The linear term q is only used by
/// the bounded-control homogenization cell problem.
struct AffineSystem {
  std::string name;
  int n = 1;
  int m = 1;
  VectorFieldFn drift;      // b
  MatrixFieldFn fields;     // F, columns f^1..f^m
  MatrixFieldFn metric;     // G, symmetric positive definite
  ScalarFn potential;       // l
  VectorFieldFn linear_cost;  // q, empty means zero
  ControlSpec control = QuadraticControl{};

  bool is_quadratic() const { return std::holds_alternative<QuadraticControl>(control); }
  int control_shells() const;
  /// Throws DomainError on inconsistent dimensions or non-SPD metric at x.
  void check_at(const Vec& x) const;
};

/// Data of the oscillating problem
///   v + 1/2 |sigma(z/eps) Dv|^2 + f(z/eps).Dv = g(z, z/eps)
/// with sigma built from F and G as for AffineSystem.
struct OscillatingSystem {
  std::string name;
  int n = 1;
  int m = 1;
  VectorFieldFn f;
  MatrixFieldFn fields;
  MatrixFieldFn metric;
  std::function<double(const Vec& z, const Vec& x)> g;
  std::function<double(const Vec& z, const Vec& x)> h;  // initial datum, may be empty
  ControlSpec control = QuadraticControl{};
};

struct OptimalControl {
  Vec a;
  bool clipped = false;
};

/// tau(x) with G^{-1}(x) = tau tau^T (Cholesky factor of G^{-1}).
Mat tau(const AffineSystem& sys, const Vec& x);
/// sigma(x) = (F(x) tau(x))^T, an m x n matrix. QuadraticControl only.
Mat sigma(const AffineSystem& sys, const Vec& x);

double hamiltonian(const AffineSystem& sys, const Vec& x, const Vec& p);
OptimalControl optimal_control(const AffineSystem& sys, const Vec& x, const Vec& p);
double lagrangian(const AffineSystem& sys, const Vec& x, const Vec& a);
Vec dynamics(const AffineSystem& sys, const Vec& x, const Vec& a);

/// Deterministic point set in B_m(radius): the origin first, then shells at
/// radii radius*k/shells with angular spacing matched to the radial one.
std::vector<Vec> control_samples(int m, double radius, int shells);

/// Lattice points of spacing `spacing` inside B_m(radius), origin first.
/// Grows monotonically with the radius.
std::vector<Vec> control_lattice(int m, double radius, double spacing);

/// Control radius actually used by the schemes on `grid`: the bounded radius,
/// the explicit truncation radius, or the automatic a-priori radius
///   R = 2 max(1, max|tau| sqrt(2 osc l) + max|b|).
double resolve_control_radius(const AffineSystem& sys, const TorusGrid& grid);

/// Controls sampled for the schemes on `grid`.
std::vector<Vec> scheme_controls(const AffineSystem& sys, const TorusGrid& grid);

struct LipschitzEstimate {
  double drift = 0.0;
  double fields = 0.0;
  double potential = 0.0;
};

/// Divided differences along the axes of a 4x refined grid.
LipschitzEstimate estimate_lipschitz(const AffineSystem& sys, const TorusGrid& grid);

struct PotentialRange {
  double min = 0.0;
  double max = 0.0;
};

/// min/max of l over a 4x refined grid.
PotentialRange potential_range(const AffineSystem& sys, const TorusGrid& grid);

}  // namespace ergodic
