#include "ergodic/catalog.hpp"
#include "ergodic/critical_value.hpp"
#include "ergodic/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ergodic;

namespace {

const std::vector<double> kSchedule{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

AffineSystem eikonal(double l0 = 1, double l1 = 1) {
  return make_system("eikonal1d", {{"l0", l0}, {"l1", l1}});
}

// Critical profile of 1/2 u'^2 = l - min l with l = 1 + cos 2 pi x: the
// optimal cost of reaching the zero of l at x = 1/2, by midpoint quadrature.
double oracle_profile(double x) {
  auto speed = [](double s) { return std::sqrt(2.0 * (1.0 + std::cos(2 * std::numbers::pi * s))); };
  auto integral = [&](double a, double b) {
    const int n = 20000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += speed(a + (b - a) * (k + 0.5) / n);
    return sum * (b - a) / n;
  };
  return x <= 0.5 ? std::min(integral(x, 0.5), integral(-0.5, x)) : std::min(integral(0.5, x), integral(x, 1.5));
}

}  // namespace

TEST_CASE("log-log slope and extrapolation helpers") {
  CHECK(loglog_slope({1, 2, 4}, {3, 6, 12}) == doctest::Approx(1.0));
  CHECK(loglog_slope({1, 10}, {5, 500}) == doctest::Approx(2.0));
  CHECK(std::isnan(loglog_slope({1, 2}, {0, 1})));
  CHECK(linear_extrapolation({0.3, 0.2, 0.1}, {1.3, 1.2, 1.1}) == doctest::Approx(1.0));
}

TEST_CASE("constant potential: lambda equals the constant") {
  const TorusGrid g({32});
  const AffineSystem sys = eikonal(0.7, 0.0);
  CHECK(lambda_discount(sys, g, kSchedule).lambda_bar == doctest::Approx(0.7).epsilon(1e-6));
  const CriticalEstimate lt = lambda_longtime(sys, ScalarField(g), 1.0, 2.0);
  CHECK(lt.lambda_bar == doctest::Approx(0.7).epsilon(1e-12));
  const AffineSystem drift = make_system("drift1d", {{"l0", 0}, {"l1", 0}});
  CHECK(std::fabs(lambda_discount(drift, g, kSchedule).lambda_bar) <= 1e-9);
}

TEST_CASE("eikonal oracle: both estimators find min l") {
  const TorusGrid g({128});
  const AffineSystem sys = eikonal();
  const CriticalEstimate d = lambda_discount(sys, g, kSchedule);
  const CriticalEstimate t = lambda_longtime(sys, ScalarField(g), 10.0, 20.0);
  CHECK(std::fabs(d.lambda_bar) <= 5e-2);
  CHECK(std::fabs(t.lambda_bar) <= 5e-2);
  CHECK(std::fabs(d.lambda_bar - t.lambda_bar) <= 5e-2);
  CHECK(d.osc_decreasing);
  CHECK(d.osc_slope >= 0.9);
  CHECK(d.diagnostics.size() == kSchedule.size());
}

TEST_CASE("schedule validation") {
  const TorusGrid g({16});
  CHECK_THROWS_AS(lambda_discount(eikonal(), g, {0.1, 0.01}), DomainError);
  CHECK_THROWS_AS(lambda_discount(eikonal(), g, {0.1, 0.2, 0.01}), DomainError);
  CHECK_THROWS_AS(lambda_discount(eikonal(), g, {0.1, -0.01, -0.02}), DomainError);
  CHECK_THROWS_AS(lambda_longtime(eikonal(), ScalarField(g), 2.0, 1.0), DomainError);
}

TEST_CASE("drifted Grushin: estimators agree") {
  const AffineSystem sys = make_system("grushin2d", {{"beta", 0.3}, {"shells", 4}});
  const TorusGrid g({16, 16});
  const CriticalEstimate d = lambda_discount(sys, g, kSchedule);
  const CriticalEstimate t = lambda_longtime(sys, ScalarField(g), 10.0, 20.0);
  CHECK(std::fabs(d.lambda_bar - t.lambda_bar) <= 5e-2);
}

TEST_CASE("correctors") {
  const TorusGrid g({128});
  SUBCASE("constant potential") {
    const Corrector c = corrector_discount(eikonal(0.4, 0.0), g, 0.01);
    for (double v : c.v.values) CHECK(std::fabs(v) <= 1e-6);
  }
  SUBCASE("eikonal profile matches the quadrature oracle") {
    const Corrector c = corrector_discount(eikonal(), g, 1e-3, 0.0);
    CHECK(c.v[c.origin] == 0.0);
    const double base = oracle_profile(0.0);
    double err = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
      err = std::max(err, std::fabs(c.v[i] - (oracle_profile(g.coordinates(i)[0]) - base)));
    CHECK(err <= 5e-2);
    REQUIRE(c.u.has_value());
  }
  SUBCASE("normalization at another origin") {
    const Corrector c = corrector_discount(make_system("drift1d"), g, 0.01, std::nullopt, {}, 17);
    CHECK(c.v[17] == 0.0);
  }
}

TEST_CASE("weak KAM fixed point") {
  const TorusGrid g({128});
  SUBCASE("constant potential converges immediately") {
    const WeakKamSolution s = weak_kam_fixed_point(eikonal(0.6, 0.0), 0.6, ScalarField(g));
    for (double v : s.chi.values) CHECK(std::fabs(v) <= 1e-12);
  }
  SUBCASE("eikonal") {
    const AffineSystem sys = eikonal();
    const CriticalEstimate d = lambda_discount(sys, g, kSchedule);
    const Corrector c = corrector_discount(d.last_field, d.last_parameter, d.lambda_bar);
    const WeakKamSolution s = weak_kam_fixed_point(sys, d.lambda_bar, *c.u);
    CHECK(s.nondecreasing);
    CHECK(s.bounded);
    REQUIRE(s.fixed_point_residuals.size() == 3);
    for (const auto& [t, r] : s.fixed_point_residuals) CHECK(r <= 5e-2);

    SUBCASE("overestimated lambda stalls at the start") {
      const WeakKamSolution o = weak_kam_fixed_point(sys, d.lambda_bar + 0.5, *c.u);
      CHECK(o.chi.values == c.u->values);
    }
    SUBCASE("residual at the critical level and above it") {
      const CriticalResidualReport r = check_critical_residual(sys, s.chi, d.lambda_bar, expected_kinks("eikonal1d"), 2);
      CHECK(r.checked_nodes == g.node_count() - 5);
      CHECK(r.sub_defect <= 0.2);
      const CriticalResidualReport up = check_critical_residual(sys, s.chi, d.lambda_bar + 1.0);
      CHECK(up.sub_defect >= 1.0 - 0.1);
    }
  }
  SUBCASE("underestimated lambda grows without bound") {
    WeakKamOptions o;
    o.t_max = 5.0;
    CHECK_THROWS_AS(weak_kam_fixed_point(eikonal(), -0.5, ScalarField(g), o), ConvergenceError);
  }
}

TEST_CASE("critical residual of an exact solution vanishes") {
  const TorusGrid g({32});
  const CriticalResidualReport r = check_critical_residual(eikonal(0.3, 0.0), ScalarField(g), 0.3);
  CHECK(r.sup_all == doctest::Approx(0.0));
  CHECK(r.checked_nodes == g.node_count());
}
