#include "ergodic/torus_grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace ergodic {

namespace {

void require_finite(const Vec& x) {
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (!std::isfinite(x[j])) throw DomainError("non-finite coordinate in torus point");
}

inline int wrap_index(long i, int n) {
  long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

TorusGrid::TorusGrid(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty() || sizes_.size() > kMaxDim)
    throw DomainError("torus grid dimension must be 1, 2 or 3");
  for (int n : sizes_)
    if (n < 4) throw DomainError("torus grid needs at least 4 nodes per axis");
  strides_.assign(sizes_.size(), 1);
  for (int j = dim() - 2; j >= 0; --j) strides_[j] = strides_[j + 1] * sizes_[j + 1];
  count_ = strides_[0] * sizes_[0];
}

double TorusGrid::min_spacing() const {
  return 1.0 / *std::max_element(sizes_.begin(), sizes_.end());
}

std::array<int, kMaxDim> TorusGrid::multi_index(std::size_t flat) const {
  std::array<int, kMaxDim> idx{};
  for (int j = 0; j < dim(); ++j) {
    idx[j] = static_cast<int>(flat / strides_[j]);
    flat %= strides_[j];
  }
  return idx;
}

std::size_t TorusGrid::flat_index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int j = 0; j < dim(); ++j) flat += strides_[j] * wrap_index(idx[j], sizes_[j]);
  return flat;
}

std::size_t TorusGrid::neighbor(std::size_t flat, int axis, int offset) const {
  auto idx = multi_index(flat);
  idx[axis] += offset;
  return flat_index(std::span<const int>(idx.data(), dim()));
}

Vec TorusGrid::coordinates(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Vec x(dim());
  for (int j = 0; j < dim(); ++j) x[j] = idx[j] * spacing(j);
  return x;
}

std::size_t TorusGrid::nearest_node(const Vec& x) const {
  require_finite(x);
  std::array<int, kMaxDim> idx{};
  for (int j = 0; j < dim(); ++j)
    idx[j] = wrap_index(std::lround(x[j] * sizes_[j]), sizes_[j]);
  return flat_index(std::span<const int>(idx.data(), dim()));
}

TorusGrid TorusGrid::refined(int factor) const {
  std::vector<int> s = sizes_;
  for (int& n : s) n *= factor;
  return TorusGrid(std::move(s));
}

ScalarField::ScalarField(TorusGrid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.node_count())
    throw DomainError("field size does not match grid node count");
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }
double ScalarField::mean() const {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}
bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Vec wrap(const Vec& x) {
  require_finite(x);
  Vec y(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double r = x[j] - std::floor(x[j]);
    // x slightly below an integer can round up to exactly 1
    if (r >= 1.0) r = 0.0;
    y[j] = r;
  }
  return y;
}

double torus_distance(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double d = std::fabs(x[j] - y[j]);
    d -= std::floor(d);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

Stencil make_stencil(const TorusGrid& grid, const Vec& x) {
  require_finite(x);
  const int n = grid.dim();
  std::array<int, kMaxDim> lower{};
  Stencil s;
  for (int j = 0; j < n; ++j) {
    const double scaled = x[j] * grid.size(j);
    double fl = std::floor(scaled);
    double t = scaled - fl;
    if (t >= 1.0) {
      fl += 1.0;
      t = 0.0;
    }
    lower[j] = wrap_index(static_cast<long>(fl), grid.size(j));
    s.frac[j] = t;
  }
  for (int k = 0; k < (1 << n); ++k) {
    std::array<int, kMaxDim> idx = lower;
    for (int j = 0; j < n; ++j)
      if (k & (1 << j)) idx[j] += 1;
    s.corner[k] = grid.flat_index(std::span<const int>(idx.data(), n));
  }
  return s;
}

double interpolate_stencil(int dim, std::span<const double> values, const Stencil& s) {
  switch (dim) {
    case 1: return interpolate_stencil<1>(values.data(), s);
    case 2: return interpolate_stencil<2>(values.data(), s);
    default: return interpolate_stencil<3>(values.data(), s);
  }
}

double interpolate(const ScalarField& f, const Vec& x) {
  return interpolate_stencil(f.grid.dim(), f.values, make_stencil(f.grid, x));
}

Vec gradient_fd(const ScalarField& f, std::size_t node) {
  const auto& g = f.grid;
  Vec grad(g.dim());
  for (int j = 0; j < g.dim(); ++j) {
    const double up = f[g.neighbor(node, j, +1)];
    const double down = f[g.neighbor(node, j, -1)];
    grad[j] = (up - down) / (2.0 * g.spacing(j));
  }
  return grad;
}

void write_field_csv(const ScalarField& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const int n = f.grid.dim();
  for (int j = 0; j < n; ++j) out << 'i' << (j + 1) << ',';
  out << "value\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto idx = f.grid.multi_index(i);
    for (int j = 0; j < n; ++j) out << idx[j] << ',';
    out << f[i] << '\n';
  }
}

ScalarField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const int n = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (n < 1 || n > kMaxDim) throw DomainError("bad field CSV header in " + path.string());

  std::vector<std::array<int, kMaxDim>> idx;
  std::vector<double> vals;
  std::array<int, kMaxDim> extent{};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::array<int, kMaxDim> id{};
    for (int j = 0; j < n; ++j) {
      std::getline(ss, cell, ',');
      id[j] = std::stoi(cell);
      extent[j] = std::max(extent[j], id[j] + 1);
    }
    std::getline(ss, cell);
    idx.push_back(id);
    vals.push_back(std::stod(cell));
  }
  TorusGrid grid(std::vector<int>(extent.begin(), extent.begin() + n));
  if (vals.size() != grid.node_count())
    throw DomainError("field CSV " + path.string() + " does not cover its grid");
  ScalarField f(grid);
  for (std::size_t r = 0; r < vals.size(); ++r)
    f[grid.flat_index(std::span<const int>(idx[r].data(), n))] = vals[r];
  return f;
}

}  // namespace ergodic
