#include "ergodic/kernels.hpp"

#include <omp.h>

#include <exception>
#include <limits>

namespace ergodic::kernels {

namespace {

template <int N>
inline double foot_value(const TransitionTable& t, const double* w, std::size_t e) {
  const std::uint32_t* c = t.corners.data() + (e << N);
  const double* f = t.fracs.data() + e * N;
  if constexpr (N == 1) {
    return lerp_clamped(w[c[0]], w[c[1]], f[0]);
  } else if constexpr (N == 2) {
    const double lo = lerp_clamped(w[c[0]], w[c[1]], f[0]);
    const double hi = lerp_clamped(w[c[2]], w[c[3]], f[0]);
    return lerp_clamped(lo, hi, f[1]);
  } else {
    double v[4];
    for (int k = 0; k < 4; ++k) v[k] = lerp_clamped(w[c[2 * k]], w[c[2 * k + 1]], f[0]);
    return lerp_clamped(lerp_clamped(v[0], v[1], f[1]), lerp_clamped(v[2], v[3], f[1]), f[2]);
  }
}

template <int N>
inline double node_update(const TransitionTable& t, const double* w, std::size_t node,
                          double discount) {
  const std::size_t first = node * t.controls;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t e = first; e < first + t.controls; ++e) {
    const double v = t.costs[e] + discount * foot_value<N>(t, w, e);
    if (v < best) best = v;
  }
  return best;
}

template <int N>
void sweep_serial(const TransitionTable& t, const double* in, double* out, double discount) {
  for (std::size_t i = 0; i < t.nodes; ++i) out[i] = node_update<N>(t, in, i, discount);
}

template <int N>
void sweep_omp(const TransitionTable& t, const double* in, double* out, double discount) {
  const auto n = static_cast<std::int64_t>(t.nodes);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    out[i] = node_update<N>(t, in, static_cast<std::size_t>(i), discount);
}

template <int N>
void sweep_gs(const TransitionTable& t, double* w, double discount) {
  for (std::size_t i = 0; i < t.nodes; ++i) w[i] = node_update<N>(t, w, i, discount);
}

void check_sizes(const TransitionTable& t, std::size_t in, std::size_t out) {
  if (in != t.nodes || out != t.nodes)
    throw DomainError("sweep buffers do not match the transition table");
}

}  // namespace

void sl_sweep_serial(const TransitionTable& t, std::span<const double> in,
                     std::span<double> out, double discount) {
  check_sizes(t, in.size(), out.size());
  switch (t.dim) {
    case 1: sweep_serial<1>(t, in.data(), out.data(), discount); break;
    case 2: sweep_serial<2>(t, in.data(), out.data(), discount); break;
    default: sweep_serial<3>(t, in.data(), out.data(), discount); break;
  }
}

void sl_sweep_omp(const TransitionTable& t, std::span<const double> in, std::span<double> out,
                  double discount) {
  check_sizes(t, in.size(), out.size());
  switch (t.dim) {
    case 1: sweep_omp<1>(t, in.data(), out.data(), discount); break;
    case 2: sweep_omp<2>(t, in.data(), out.data(), discount); break;
    default: sweep_omp<3>(t, in.data(), out.data(), discount); break;
  }
}

void sl_sweep_gauss_seidel(const TransitionTable& t, std::span<double> w, double discount) {
  check_sizes(t, w.size(), w.size());
  switch (t.dim) {
    case 1: sweep_gs<1>(t, w.data(), discount); break;
    case 2: sweep_gs<2>(t, w.data(), discount); break;
    default: sweep_gs<3>(t, w.data(), discount); break;
  }
}

std::vector<std::uint32_t> sl_policy(const TransitionTable& t, std::span<const double> in,
                                     double discount) {
  std::vector<std::uint32_t> policy(t.nodes, 0);
  for (std::size_t i = 0; i < t.nodes; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t.controls; ++j) {
      const std::size_t e = i * t.controls + j;
      double foot = 0.0;
      switch (t.dim) {
        case 1: foot = foot_value<1>(t, in.data(), e); break;
        case 2: foot = foot_value<2>(t, in.data(), e); break;
        default: foot = foot_value<3>(t, in.data(), e); break;
      }
      const double v = t.costs[e] + discount * foot;
      if (v < best) {
        best = v;
        policy[i] = static_cast<std::uint32_t>(j);
      }
    }
  }
  return policy;
}

namespace {

inline double lf_node(const TorusGrid& grid, const double* v, const double* theta,
                      const NodeHamiltonian& H, std::size_t i) {
  double p[kMaxDim];
  double dissipation = 0.0;
  for (int j = 0; j < grid.dim(); ++j) {
    const double h = grid.spacing(j);
    const double fwd = (v[grid.neighbor(i, j, +1)] - v[i]) / h;
    const double bwd = (v[i] - v[grid.neighbor(i, j, -1)]) / h;
    p[j] = 0.5 * (fwd + bwd);
    dissipation += 0.5 * theta[j] * (fwd - bwd);
  }
  return H(i, p) - dissipation;
}

}  // namespace

void lf_hamiltonian_serial(const TorusGrid& grid, std::span<const double> v,
                           std::span<const double> theta, const NodeHamiltonian& H,
                           std::span<double> out) {
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    out[i] = lf_node(grid, v.data(), theta.data(), H, i);
}

void lf_hamiltonian_omp(const TorusGrid& grid, std::span<const double> v,
                        std::span<const double> theta, const NodeHamiltonian& H,
                        std::span<double> out) {
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(grid.node_count());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = lf_node(grid, v.data(), theta.data(), H, static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(ergodic_lf_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ergodic::kernels
