#pragma once

#include "ergodic/torus_grid.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ergodic {

/// Precomputed semi-Lagrangian transitions: for every (node, control) entry
/// the interpolation stencil of the foot point and the running cost paid.
/// Entry e = node * controls + control.
struct TransitionTable {
  int dim = 1;
  std::size_t nodes = 0;
  std::size_t controls = 0;
  std::vector<std::uint32_t> corners;  // (1 << dim) per entry
  std::vector<double> fracs;           // dim per entry
  std::vector<double> costs;           // one per entry
};

enum class SweepMode { serial, parallel, gauss_seidel };

namespace kernels {

/// out[i] = min_j { cost(i,j) + discount * I[in](foot(i,j)) }
/// Reference implementation.
void sl_sweep_serial(const TransitionTable& t, std::span<const double> in,
                     std::span<double> out, double discount);

/// Same update with the node loop split across OpenMP threads. Every node is
/// computed by the same arithmetic as the serial kernel, so the results are
/// bit-identical.
void sl_sweep_omp(const TransitionTable& t, std::span<const double> in,
                  std::span<double> out, double discount);

/// In-place Gauss-Seidel variant (nodes in flat order).
void sl_sweep_gauss_seidel(const TransitionTable& t, std::span<double> w, double discount);

/// Minimizing control index per node (lowest index on ties).
std::vector<std::uint32_t> sl_policy(const TransitionTable& t, std::span<const double> in,
                                     double discount);

/// Numerical Hamiltonian at a node given the averaged gradient.
using NodeHamiltonian = std::function<double(std::size_t node, const double* p)>;

/// Lax-Friedrichs numerical Hamiltonian
///   H(x_i, (p+ + p-)/2) - sum_j theta_j/2 (p+_j - p-_j)
/// with one-sided periodic differences p+-. Reference implementation.
void lf_hamiltonian_serial(const TorusGrid& grid, std::span<const double> v,
                           std::span<const double> theta, const NodeHamiltonian& H,
                           std::span<double> out);

void lf_hamiltonian_omp(const TorusGrid& grid, std::span<const double> v,
                        std::span<const double> theta, const NodeHamiltonian& H,
                        std::span<double> out);

}  // namespace kernels

inline void sl_sweep(const TransitionTable& t, std::span<const double> in, std::span<double> out,
                     double discount, SweepMode mode) {
  if (mode == SweepMode::parallel)
    kernels::sl_sweep_omp(t, in, out, discount);
  else
    kernels::sl_sweep_serial(t, in, out, discount);
}

}  // namespace ergodic
