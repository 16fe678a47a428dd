#pragma once

#include "ergodic/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergodic {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr int kMaxDim = 3;

/// Uniform periodic grid on the flat torus [0,1)^n, n <= 3.
///
/// Nodes are stored row-major: the last axis varies fastest.
class TorusGrid {
 public:
  TorusGrid() = default;
  explicit TorusGrid(std::vector<int> sizes);

  int dim() const { return static_cast<int>(sizes_.size()); }
  int size(int axis) const { return sizes_[axis]; }
  const std::vector<int>& sizes() const { return sizes_; }
  double spacing(int axis) const { return 1.0 / sizes_[axis]; }
  double min_spacing() const;
  std::size_t node_count() const { return count_; }

  std::array<int, kMaxDim> multi_index(std::size_t flat) const;
  /// Flat index of a multi-index; components are wrapped modulo N_j.
  std::size_t flat_index(std::span<const int> idx) const;
  std::size_t neighbor(std::size_t flat, int axis, int offset) const;

  Vec coordinates(std::size_t flat) const;
  std::size_t nearest_node(const Vec& x) const;

  /// Refined copy with every axis multiplied by `factor`.
  TorusGrid refined(int factor) const;

  bool operator==(const TorusGrid& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 0;
};

/// Node-valued scalar field on a TorusGrid.
struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(TorusGrid g, double fill = 0.0)
      : grid(std::move(g)), values(grid.node_count(), fill) {}
  ScalarField(TorusGrid g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  double min() const;
  double max() const;
  double mean() const;
  double oscillation() const { return max() - min(); }
  bool all_finite() const;
};

/// Interpolation stencil of a point: lower-corner index per axis and the
/// fractional offsets inside the cell.
struct Stencil {
  std::array<std::size_t, 1 << kMaxDim> corner{};
  std::array<double, kMaxDim> frac{};
};

/// Reduce x modulo Z^n into [0,1)^n.
Vec wrap(const Vec& x);

/// Torus distance |x - y|_T (Euclidean norm of the shortest representative).
double torus_distance(const Vec& x, const Vec& y);

Stencil make_stencil(const TorusGrid& grid, const Vec& x);

/// (1-t)a + tb clamped to [min(a,b), max(a,b)]: monotone in a and b and
/// exact on constants, also in floating point.
inline double lerp_clamped(double a, double b, double t) {
  const double v = (1.0 - t) * a + t * b;
  const double lo = a < b ? a : b;
  const double hi = a < b ? b : a;
  return v < lo ? lo : (v > hi ? hi : v);
}

/// Nested multilinear interpolation of `values` over a stencil, dimension
/// known at compile time.
template <int N>
inline double interpolate_stencil(const double* values, const Stencil& s) {
  if constexpr (N == 1) {
    return lerp_clamped(values[s.corner[0]], values[s.corner[1]], s.frac[0]);
  } else if constexpr (N == 2) {
    const double lo = lerp_clamped(values[s.corner[0]], values[s.corner[1]], s.frac[0]);
    const double hi = lerp_clamped(values[s.corner[2]], values[s.corner[3]], s.frac[0]);
    return lerp_clamped(lo, hi, s.frac[1]);
  } else {
    double v[4];
    for (int k = 0; k < 4; ++k)
      v[k] = lerp_clamped(values[s.corner[2 * k]], values[s.corner[2 * k + 1]], s.frac[0]);
    const double lo = lerp_clamped(v[0], v[1], s.frac[1]);
    const double hi = lerp_clamped(v[2], v[3], s.frac[1]);
    return lerp_clamped(lo, hi, s.frac[2]);
  }
}

double interpolate_stencil(int dim, std::span<const double> values, const Stencil& s);

/// Periodic multilinear interpolation at an arbitrary finite point.
double interpolate(const ScalarField& f, const Vec& x);

/// Central periodic differences (f(i+e_j) - f(i-e_j)) / (2 h_j).
Vec gradient_fd(const ScalarField& f, std::size_t node);

/// Sample a function of position at every node.
template <class Fn>
ScalarField sample_field(const TorusGrid& grid, Fn&& fn) {
  ScalarField f(grid);
  for (std::size_t i = 0; i < grid.node_count(); ++i) f[i] = fn(grid.coordinates(i));
  return f;
}

void write_field_csv(const ScalarField& f, const std::filesystem::path& path);
ScalarField read_field_csv(const std::filesystem::path& path);

}  // namespace ergodic
