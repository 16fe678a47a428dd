#include "ergodic/catalog.hpp"
#include "ergodic/errors.hpp"
#include "ergodic/lax_oleinik.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace ergodic;

namespace {

ScalarField random_field(const TorusGrid& g, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ScalarField f(g);
  for (double& v : f.values) v = u(rng);
  return f;
}

}  // namespace

TEST_CASE("constant data") {
  const TorusGrid g({32});
  const AffineSystem zero = make_system("eikonal1d", {{"l0", 0}, {"l1", 0}});
  const ScalarField c(g, 2.5);
  CHECK(semigroup_step(zero, c, 0.001).values == c.values);

  const AffineSystem five = make_system("eikonal1d", {{"l0", 5}, {"l1", 0}});
  const double dt = 0.001;
  for (double v : semigroup_step(five, c, dt).values) CHECK(v == doctest::Approx(2.5 + 5 * dt));

  const Evolution ev = evolve(five, ScalarField(g), 1.0, 50);
  for (std::size_t k = 0; k < ev.snapshots.size(); ++k)
    for (double v : ev.snapshots[k].values) CHECK(v == doctest::Approx(5.0 * ev.times[k]).epsilon(1e-12));
}

TEST_CASE("minimum of the datum is a stopping point") {
  const TorusGrid g({64});
  const AffineSystem sys = make_system("eikonal1d", {{"l0", 0}, {"l1", 0}});
  const ScalarField phi = sample_field(g, [](const Vec& x) {
    const double d = std::min(x[0], 1.0 - x[0]);
    return 50.0 * d;
  });
  const LaxOleinikSemigroup T(sys, g);
  const ScalarField out = T.advance(phi, 200);
  CHECK(out[0] == 0.0);
}

TEST_CASE("semigroup axioms on random data") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const AffineSystem sys = make_system("grushin2d", {{"beta", 0.3}, {"shells", 5}});
  const TorusGrid g({12, 12});
  const LaxOleinikSemigroup T(sys, g);
  for (int trial = 0; trial < 100; ++trial) {
    const ScalarField phi = random_field(g, rng);
    ScalarField psi = phi;
    std::uniform_real_distribution<double> bump(0.0, 1.0);
    for (double& v : psi.values) v += bump(rng) < 0.5 ? bump(rng) : 0.0;
    const double c = u(rng);
    ScalarField shifted = phi;
    for (double& v : shifted.values) v += c;

    const ScalarField a = T.step(phi);
    const ScalarField b = T.step(psi);
    const ScalarField s = T.step(shifted);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      CHECK(a[i] <= b[i]);
      CHECK(std::fabs(s[i] - a[i] - c) <= 1e-12);
    }
    const long n1 = 1 + trial % 5, n2 = 2 + trial % 3;
    const ScalarField two = T.advance(T.advance(phi, n1), n2);
    const ScalarField one = T.advance(phi, n1 + n2);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(std::fabs(two[i] - one[i]) <= 1e-12);
  }
}

TEST_CASE("evolve") {
  const AffineSystem sys = make_system("eikonal1d");
  const TorusGrid g({64});
  std::mt19937_64 rng(1);
  const ScalarField w0 = random_field(g, rng);
  const Evolution ev = evolve(sys, w0, 0.5, 40);
  CHECK(ev.times.front() == 0.0);
  CHECK(ev.snapshots.front().values == w0.values);
  CHECK(ev.times.back() == doctest::Approx(0.5));
  for (std::size_t k = 0; k < ev.snapshots.size(); ++k) {
    const double bound = ev.times[k] * 2.0 + 1.0;
    CHECK(ev.snapshots[k].min() >= -bound);
    CHECK(ev.snapshots[k].max() <= bound);
  }

  SUBCASE("composition of evolutions") {
    const double dt = aligned_dt({0.25, 0.5}, ev.dt);
    const Evolution first = evolve(sys, w0, 0.25, 1000000, dt);
    const Evolution second = evolve(sys, first.snapshots.back(), 0.25, 1000000, dt);
    const Evolution whole = evolve(sys, w0, 0.5, 1000000, dt);
    CHECK(second.snapshots.back().values == whole.snapshots.back().values);
  }
  SUBCASE("sup of the difference of two evolutions is nonincreasing") {
    const ScalarField v0 = random_field(g, rng, 3.0);
    const LaxOleinikSemigroup T(sys, g);
    ScalarField a = w0, b = v0;
    double prev = 1e300;
    for (int k = 0; k < 200; ++k) {
      double d = -1e300;
      for (std::size_t i = 0; i < g.node_count(); ++i) d = std::max(d, a[i] - b[i]);
      CHECK(d <= prev);
      prev = d;
      a = T.step(a);
      b = T.step(b);
    }
  }
  SUBCASE("long-time slope approaches min l") {
    const Evolution lt = evolve(sys, ScalarField(g), 20.0, 1000000);
    CHECK(std::fabs(lt.snapshots.back().mean() / 20.0) <= 5e-2);
  }
}

TEST_CASE("step alignment") {
  CHECK(aligned_steps(1.0, 0.25) == 4);
  CHECK_THROWS_AS(aligned_steps(1.0, 0.3), DomainError);
  const double dt = aligned_dt({0.25, 0.5, 1.0}, 0.003);
  CHECK(dt <= 0.003);
  CHECK(aligned_steps(0.25, dt) * 2 == aligned_steps(0.5, dt));
}

TEST_CASE("evolution output") {
  const TorusGrid g({16});
  const Evolution ev = evolve(make_system("eikonal1d"), ScalarField(g), 0.1, 10);
  const auto dir = std::filesystem::temp_directory_path() / "ergodic_evolution_test";
  std::filesystem::remove_all(dir);
  write_evolution(ev, dir);
  std::ifstream index(dir / "index.csv");
  std::string header;
  std::getline(index, header);
  CHECK(header == "snapshot,time,file");
  std::size_t rows = 0;
  for (std::string line; std::getline(index, line);) rows += !line.empty();
  CHECK(rows == ev.snapshots.size());
  CHECK(read_field_csv(dir / "snapshot_00000.csv").values == ev.snapshots.front().values);
  std::filesystem::remove_all(dir);
}
