#include "ergodic/catalog.hpp"
#include "ergodic/kernels.hpp"
#include "ergodic/transition.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <memory>
#include <numbers>

namespace {

using namespace ergodic;

struct Fixture {
  TransitionOperator op;
  std::vector<double> in, out;

  explicit Fixture(int n)
      : op(make_system("grushin2d"), TorusGrid({n, n})),
        in(op.grid().node_count()),
        out(op.grid().node_count()) {
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = std::sin(0.01 * static_cast<double>(i));
  }
};

Fixture& fixture(int n) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& f = cache[n];
  if (!f) f = std::make_unique<Fixture>(n);
  return *f;
}

void BM_SlSweepSerial(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::sl_sweep_serial(f.op.table(), f.in, f.out, 0.999);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.op.table().nodes * f.op.table().controls));
}

void BM_SlSweepOmp(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::sl_sweep_omp(f.op.table(), f.in, f.out, 0.999);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.op.table().nodes * f.op.table().controls));
}

struct LfFixture {
  TorusGrid grid;
  std::vector<double> v, out, theta;
  kernels::NodeHamiltonian H;

  explicit LfFixture(int n) : grid({n, n}), v(grid.node_count()), out(grid.node_count()), theta{1.0, 1.0} {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec x = grid.coordinates(i);
      v[i] = std::cos(2 * std::numbers::pi * x[0]) * std::sin(2 * std::numbers::pi * x[1]);
    }
    H = [](std::size_t, const double* p) { return 0.5 * (p[0] * p[0] + p[1] * p[1]); };
  }
};

void BM_LfSerial(benchmark::State& state) {
  LfFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::lf_hamiltonian_serial(f.grid, f.v, f.theta, f.H, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

void BM_LfOmp(benchmark::State& state) {
  LfFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::lf_hamiltonian_omp(f.grid, f.v, f.theta, f.H, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

}  // namespace

BENCHMARK(BM_SlSweepSerial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SlSweepOmp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LfSerial)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LfOmp)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
