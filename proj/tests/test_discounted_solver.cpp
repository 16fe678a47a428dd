#include "ergodic/catalog.hpp"
#include "ergodic/discounted_solver.hpp"
#include "ergodic/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ergodic;

namespace {

AffineSystem eikonal(double l0, double l1, int shells = 16) {
  return make_system("eikonal1d", {{"l0", l0}, {"l1", l1}, {"shells", shells}});
}

}  // namespace

TEST_CASE("zero potential gives the zero solution") {
  const DiscountedSolve s = solve_discounted(eikonal(0, 0), 0.1, TorusGrid({32}));
  for (double v : s.w.values) CHECK(v == 0.0);
  CHECK(s.clip_events == 0);
}

TEST_CASE("constant potential gives l / delta") {
  const double delta = 0.2;
  const DiscountedSolve s = solve_discounted(eikonal(5, 0), delta, TorusGrid({32}));
  for (double v : s.w.values) CHECK(v == doctest::Approx(5.0 / delta).epsilon(1e-6));
  CHECK(s.sup_residual <= 1e-6);
}

TEST_CASE("eikonal: delta w is uniformly close to min l") {
  const DiscountedSolve s = solve_discounted(eikonal(1, 1), 1e-3, TorusGrid({128}));
  for (double v : s.w.values) CHECK(std::fabs(1e-3 * v) <= 5e-2);
  CHECK(s.sup_residual <= 1e-6);
}

TEST_CASE("solver invariants") {
  const TorusGrid g({64});
  const double delta = 0.05;
  DiscountedOptions o;
  o.record_updates = true;
  o.accelerate = false;
  const AffineSystem sys = make_system("drift1d", {{"shells", 8}});
  const DiscountedSolve s = solve_discounted(sys, delta, g, o);

  SUBCASE("a-priori bound") {
    for (double v : s.w.values) CHECK(std::fabs(delta * v) <= 2.0 + 1e-6);
  }
  SUBCASE("updates contract at least at rate 1 - delta dt") {
    const double beta = 1.0 - delta * s.dt;
    for (std::size_t k = 1; k < s.updates.size(); ++k)
      CHECK(s.updates[k] <= beta * s.updates[k - 1] * (1 + 1e-9) + 1e-15);
  }
  SUBCASE("constant shift of the potential shifts w by c / delta") {
    const AffineSystem up = make_system("drift1d", {{"shells", 8}, {"l0", 1.75}});
    const DiscountedSolve t = solve_discounted(up, delta, g, o);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      CHECK(std::fabs(t.w[i] - s.w[i] - 0.75 / delta) <= 1e-10 / delta + 1e-6);
  }
  SUBCASE("comparison: l <= l' gives w <= w'") {
    AffineSystem hi = sys;
    hi.potential = [&](const Vec& x) { return sys.potential(x) + 0.3 * std::pow(std::sin(std::numbers::pi * x[0]), 2); };
    const DiscountedSolve t = solve_discounted(hi, delta, g, o);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(s.w[i] <= t.w[i]);
  }
}

TEST_CASE("serial, parallel and Gauss-Seidel modes") {
  const AffineSystem sys = make_system("grushin2d", {{"shells", 4}});
  const TorusGrid g({16, 16});
  DiscountedOptions o;
  o.mode = SweepMode::serial;
  const DiscountedSolve a = solve_discounted(sys, 0.1, g, o);
  o.mode = SweepMode::parallel;
  const DiscountedSolve b = solve_discounted(sys, 0.1, g, o);
  CHECK(a.w.values == b.w.values);
  CHECK(a.iterations == b.iterations);
  o.mode = SweepMode::gauss_seidel;
  const DiscountedSolve c = solve_discounted(sys, 0.1, g, o);
  for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(std::fabs(c.w[i] - a.w[i]) <= 2e-6 / 1.0 + 1e-5);
}

TEST_CASE("errors") {
  const TorusGrid g({16});
  CHECK_THROWS_AS(solve_discounted(eikonal(1, 1), 0.0, g), DomainError);
  DiscountedOptions o;
  o.tol = -1;
  CHECK_THROWS_AS(solve_discounted(eikonal(1, 1), 0.1, g, o), DomainError);
  o.tol = 1e-12;
  o.max_iter = 3;
  try {
    solve_discounted(eikonal(1, 1), 0.1, g, o);
    CHECK(false);
  } catch (const ConvergenceError& e) {
    CHECK(e.last_update() > 0.0);
  }
  o = {};
  o.dt = 10.0;
  CHECK_THROWS_AS(solve_discounted(eikonal(1, 1), 0.1, g, o), CflError);
}

TEST_CASE("residual diagnostics") {
  const TorusGrid g({32});
  const double delta = 0.5;
  SUBCASE("matching constant") {
    const ResidualReport r = residual(eikonal(delta * 3.0, 0), delta, ScalarField(g, 3.0));
    CHECK(r.sup == doctest::Approx(0.0));
  }
  SUBCASE("affine in w") {
    const AffineSystem sys = eikonal(1, 1);
    const DiscountedSolve s = solve_discounted(sys, delta, g);
    ScalarField up = s.w;
    for (double& v : up.values) v += 1.0;
    const ResidualReport a = residual(sys, delta, s.w);
    const ResidualReport b = residual(sys, delta, up);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      CHECK(b.field[i] - a.field[i] == doctest::Approx(delta));
  }
  SUBCASE("mean residual decreases under refinement") {
    const AffineSystem sys = eikonal(2, 0.1);
    double prev = 1e300;
    for (int n : {32, 64, 128}) {
      const DiscountedSolve s = solve_discounted(sys, 1.0, TorusGrid({n}));
      const double r = residual(sys, 1.0, s.w).mean;
      CHECK(r < prev);
      prev = r;
    }
  }
}

TEST_CASE("Lax-Friedrichs cross-check agrees with the semi-Lagrangian solve") {
  const AffineSystem sys = eikonal(2, 0.1);
  const TorusGrid g({128});
  const DiscountedSolve sl = solve_discounted(sys, 1.0, g);
  const DiscountedSolve lf = solve_discounted_lf(sys, 1.0, g);
  double diff = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) diff = std::max(diff, std::fabs(sl.w[i] - lf.w[i]));
  CHECK(diff <= 5e-2);
}
