#include "ergodic/catalog.hpp"
#include "ergodic/critical_value.hpp"
#include "ergodic/errors.hpp"
#include "ergodic/homogenization.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace ergodic;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

OscillatingSystem simple(std::function<double(const Vec&, const Vec&)> g, double f = 0.0, double s = 1.0) {
  OscillatingSystem o;
  o.name = "test";
  o.f = [f](const Vec&) { return vec({f}); };
  o.fields = [s](const Vec&) { return Mat::Constant(1, 1, s); };
  o.metric = [](const Vec&) { return Mat::Identity(1, 1); };
  o.g = std::move(g);
  o.h = [](const Vec&, const Vec& x) { return std::cos(2 * kPi * x[0]); };
  return o;
}

// l = 1 - cos 2 pi x: the flat piece ends at c0 = int sqrt(2 l) = 4 / pi.
OscillatingSystem flat_piece() {
  return simple([](const Vec&, const Vec& x) { return 1.0 - std::cos(2 * kPi * x[0]); });
}

// Hbar(P) for l = 1 - cos 2 pi x outside the flat piece: solve
// P = int sqrt(2 (l + E)) for E by bisection with midpoint quadrature.
double oracle_hbar(double P) {
  auto momentum = [](double E) {
    const int n = 4000;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += std::sqrt(2.0 * (1.0 - std::cos(2 * kPi * (k + 0.5) / n) + E));
    return s / n;
  };
  if (P <= momentum(0.0)) return 0.0;
  double lo = 0.0, hi = P * P;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (momentum(mid) < P ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CellOptions small_cell() {
  CellOptions c;
  c.nodes_per_axis = 32;
  return c;
}

}  // namespace

TEST_CASE("frozen data") {
  const OscillatingSystem o = simple([](const Vec&, const Vec&) { return 0.0; });
  const FrozenData zero = frozen_data(o, vec({0.2}), vec({0.0}));
  CHECK(zero.b_cell(vec({0.4}))[0] == 0.0);
  CHECK(zero.l_cell(vec({0.4})) == 0.0);
  const FrozenData one = frozen_data(o, vec({0.2}), vec({1.0}));
  CHECK(one.b_cell(vec({0.4}))[0] == doctest::Approx(1.0));
  CHECK(one.l_cell(vec({0.4})) == doctest::Approx(-0.5));

  const OscillatingSystem drift = simple([](const Vec&, const Vec&) { return 0.7; }, 0.3, 0.0);
  const FrozenData d = frozen_data(drift, vec({0.2}), vec({2.0}));
  CHECK(d.b_cell(vec({0.1}))[0] == doctest::Approx(0.3));
  CHECK(d.l_cell(vec({0.1})) == doctest::Approx(0.7 - 0.6));
}

TEST_CASE("cell problems") {
  SUBCASE("zero data") {
    const OscillatingSystem o = simple([](const Vec&, const Vec&) { return 0.0; });
    CHECK(std::fabs(effective_hamiltonian(o, vec({0.0}), vec({0.0}), small_cell())) <= 1e-9);
  }
  SUBCASE("P = 0 gives -min l") {
    const OscillatingSystem o = simple([](const Vec&, const Vec& x) { return 0.5 + std::sin(2 * kPi * x[0]); });
    CHECK(effective_hamiltonian(o, vec({0.0}), vec({0.0}), small_cell()) == doctest::Approx(0.5).epsilon(5e-2));
  }
  SUBCASE("flat piece and the branch beyond it") {
    const double c0 = 4.0 / kPi;
    CellOptions c;
    const double inside = effective_hamiltonian(flat_piece(), vec({0.0}), vec({0.5 * c0}), c);
    CHECK(std::fabs(inside) <= 5e-2);
    const double outside = effective_hamiltonian(flat_piece(), vec({0.0}), vec({2.0}), c);
    CHECK(outside == doctest::Approx(oracle_hbar(2.0)).epsilon(0.1));
  }
  SUBCASE("matches the critical value of the same system") {
    const OscillatingSystem o = flat_piece();
    const AffineSystem cell = cell_system(o, vec({0.3}), vec({0.4}));
    const CellOptions c = small_cell();
    const double a = effective_hamiltonian(o, vec({0.3}), vec({0.4}), c);
    const double b = -lambda_discount(cell, TorusGrid({c.nodes_per_axis}), c.deltas, c.discount).lambda_bar;
    CHECK(std::fabs(a - b) <= 1e-12);
  }
}

TEST_CASE("oracle values of the effective Hamiltonian") {
  CHECK(oracle_hbar(1.5) == doctest::Approx(0.2446).epsilon(2e-3));
  CHECK(oracle_hbar(2.0) == doctest::Approx(1.0638).epsilon(2e-3));
}

TEST_CASE("effective table") {
  TableOptions t;
  t.z_per_axis = 4;
  t.p_per_axis = 9;
  t.cell = small_cell();
  SUBCASE("z-independent data give identical rows") {
    const EffectiveTable tab = effective_table(flat_piece(), t);
    for (std::size_t z = 1; z < tab.z_grid.node_count(); ++z)
      for (std::size_t p = 0; p < tab.p_count(); ++p) CHECK(tab.at(z, p) == tab.at(0, p));
    CHECK(tab.symmetry_defect <= 2 * t.cell_tol);
    CHECK(tab.modulus_violation() <= 0.0);
    CHECK(tab(vec({0.1}), vec({0.0})) == doctest::Approx(tab.at(0, 4)));
    CHECK_THROWS_AS(tab(vec({0.1}), vec({2.5})), RangeError);
  }
  SUBCASE("modulus bound on the oscillating scenario") {
    const EffectiveTable tab = effective_table(make_oscillating("osc1d"), t);
    CHECK_FALSE(tab.modulus_check.empty());
    for (const ModulusSample& m : tab.modulus_check) CHECK(m.difference <= m.omega + 2 * t.cell_tol);
    const auto path = std::filesystem::temp_directory_path() / "ergodic_table.csv";
    write_effective_table_csv(tab, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "z1,P1,Hbar");
    std::filesystem::remove(path);
  }
}

TEST_CASE("oscillating solves") {
  SUBCASE("constant data") {
    const OscillatingSystem c = make_oscillating("const1d", {{"c", 0.5}});
    const ScalarField v = solve_oscillating_stationary(c, 0.25, TorusGrid({64}));
    for (double x : v.values) CHECK(x == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("no fast variable: independent of epsilon") {
    const OscillatingSystem o = simple([](const Vec& z, const Vec&) { return 1.0 + 0.5 * std::sin(2 * kPi * z[0]); });
    const ScalarField a = solve_oscillating_stationary(o, 0.25, TorusGrid({64}));
    const ScalarField b = solve_oscillating_stationary(o, 0.125, TorusGrid({64}));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-12);
  }
  SUBCASE("resolution precondition") {
    CHECK_THROWS_AS(solve_oscillating_stationary(flat_piece(), 0.0625, TorusGrid({64})), DomainError);
  }
}

TEST_CASE("effective initial data") {
  const TorusGrid fast({128});
  OscillatingSystem o = flat_piece();
  CHECK(min_over_fast(o, vec({0.3}), fast) == doctest::Approx(-1.0));
  const StabilizationReport r = effective_initial_data(o, vec({0.3}), fast, 5.0, 5e-2);
  CHECK(r.h_bar == doctest::Approx(-1.0));
  CHECK(r.agrees);
  CHECK(r.deviation <= 5e-2);

  o.h = [](const Vec& z, const Vec& x) { return z[0] + std::cos(2 * kPi * x[0]); };
  CHECK(min_over_fast(o, vec({0.3}), fast) == doctest::Approx(0.3 - 1.0));
  o.h = [](const Vec& z, const Vec&) { return 2.0 * z[0]; };
  CHECK(min_over_fast(o, vec({0.3}), fast) == doctest::Approx(0.6));
}

TEST_CASE("effective equation solves") {
  TableOptions t;
  t.z_per_axis = 4;
  t.p_per_axis = 9;
  t.cell = small_cell();
  SUBCASE("zero Hamiltonian") {
    const OscillatingSystem z = simple([](const Vec&, const Vec&) { return 0.0; });
    const EffectiveTable tab = effective_table(z, t);
    const EffectiveSolve s = solve_effective_stationary(tab, TorusGrid({32}));
    for (double v : s.v.values) CHECK(std::fabs(v) <= 1e-6);
  }
  SUBCASE("constant Hamiltonian transports the datum") {
    const OscillatingSystem c = simple([](const Vec&, const Vec&) { return 0.0; }, 0.0, 0.0);
    EffectiveTable tab = effective_table(c, t);
    for (double& v : tab.values) v = 0.4;
    const TorusGrid g({64});
    const ScalarField v0 = sample_field(g, [](const Vec& x) { return 0.2 * std::sin(2 * kPi * x[0]); });
    const EffectiveSolve s = solve_effective_evolutive(tab, v0, 0.5);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(s.v[i] == doctest::Approx(v0[i] - 0.2));
  }
  SUBCASE("matches a direct solve without fast variable") {
    const OscillatingSystem o = simple([](const Vec& z, const Vec&) { return 1.0 + 0.5 * std::sin(2 * kPi * z[0]); });
    TableOptions fine = t;
    fine.z_per_axis = 32;
    fine.p_per_axis = 33;
    fine.p_max = 4.0;
    const EffectiveTable tab = effective_table(o, fine);
    const TorusGrid g({256});
    const EffectiveSolve e = solve_effective_stationary(tab, g);
    const ScalarField d = solve_oscillating_stationary(o, 0.25, g);
    double err = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) err = std::max(err, std::fabs(e.v[i] - d[i]));
    CHECK(err <= 5e-2);
  }
  SUBCASE("CFL violation") {
    const OscillatingSystem z = flat_piece();
    const EffectiveTable tab = effective_table(z, t);
    EffectiveOptions o;
    o.dt = 1.0;
    CHECK_THROWS_AS(solve_effective_evolutive(tab, ScalarField(TorusGrid({32})), 1.0, o), CflError);
  }
}

TEST_CASE("convergence study on constant data has zero error") {
  StudyOptions s;
  s.table.z_per_axis = 4;
  s.table.p_per_axis = 9;
  s.table.cell = small_cell();
  s.effective_nodes = 64;
  const HomogenizationStudy st = convergence_study(make_oscillating("const1d"), {0.25, 0.125}, HomogenizationMode::stationary, s);
  REQUIRE(st.errors.size() == 2);
  for (double e : st.errors) CHECK(e <= 1e-6);
  CHECK_THROWS_AS(convergence_study(make_oscillating("const1d"), {0.125, 0.25}, HomogenizationMode::stationary, s), DomainError);
}
