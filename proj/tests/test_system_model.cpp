#include "ergodic/catalog.hpp"
#include "ergodic/errors.hpp"
#include "ergodic/system_model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ergodic;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

AffineSystem line(double c, double l, double radius = 0.0) {
  AffineSystem s;
  s.name = "line";
  s.drift = [c](const Vec&) { return vec({c}); };
  s.fields = [](const Vec&) { return Mat::Identity(1, 1); };
  s.metric = [](const Vec&) { return Mat::Identity(1, 1); };
  s.potential = [l](const Vec&) { return l; };
  s.control = QuadraticControl{radius, 16};
  return s;
}

AffineSystem plane(Mat G, double l) {
  AffineSystem s;
  s.n = 2;
  s.m = 2;
  s.drift = [](const Vec&) { return Vec::Zero(2); };
  s.fields = [](const Vec&) { return Mat::Identity(2, 2); };
  s.metric = [G](const Vec&) { return G; };
  s.potential = [l](const Vec&) { return l; };
  return s;
}

// sup_a { p.Fa - L(x,a) } by dense search over a box.
double legendre_brute(const AffineSystem& s, const Vec& x, const Vec& p, double box, int n) {
  double best = -1e300;
  if (s.m == 1) {
    for (int i = 0; i <= n; ++i) {
      const Vec a = vec({-box + 2 * box * i / n});
      best = std::max(best, p.dot(s.fields(x) * a) - lagrangian(s, x, a));
    }
  } else {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const Vec a = vec({-box + 2 * box * i / n, -box + 2 * box * j / n});
        best = std::max(best, p.dot(s.fields(x) * a) - lagrangian(s, x, a));
      }
  }
  return best;
}

}  // namespace

TEST_CASE("sigma factors") {
  CHECK(sigma(line(0, 0), vec({0.3}))(0, 0) == doctest::Approx(1.0));
  const AffineSystem g = make_system("grushin2d");
  CHECK(sigma(g, vec({0.25, 0.7})).isApprox(Mat::Identity(2, 2), 1e-14));
  const Mat s0 = sigma(g, vec({0.0, 0.7}));
  CHECK(s0(0, 0) == doctest::Approx(1.0));
  CHECK(std::fabs(s0(1, 1)) < 1e-14);
  CHECK(std::fabs(s0(0, 1)) < 1e-14);
  CHECK(std::fabs(s0(1, 0)) < 1e-14);

  Mat G(2, 2);
  G << 2.0, 0.5, 0.5, 1.0;
  const AffineSystem p = plane(G, 0.0);
  const Mat t = tau(p, vec({0.1, 0.2}));
  CHECK((t * t.transpose()).isApprox(G.inverse(), 1e-12));
}

TEST_CASE("hamiltonian values") {
  const AffineSystem e = make_system("eikonal1d");
  for (double x : {0.0, 0.2, 0.5, 0.9})
    CHECK(hamiltonian(e, vec({x}), vec({0.0})) == doctest::Approx(-e.potential(vec({x}))));
  CHECK(hamiltonian(line(0, 0), vec({0.1}), vec({2.0})) == doctest::Approx(2.0));
  CHECK(hamiltonian(line(0.7, 0), vec({0.1}), vec({2.0})) == doctest::Approx(2 * 0.7 + 2.0));
}

TEST_CASE("hamiltonian is the Legendre transform of the running cost") {
  Mat G(2, 2);
  G << 2.0, 0.3, 0.3, 1.0;
  const AffineSystem p = plane(G, 0.4);
  const AffineSystem g = make_system("grushin2d", {{"beta", 0.3}});
  const AffineSystem l = line(0.5, 0.25);
  for (const Vec& q : {vec({0.5, -1.0}), vec({1.5, 0.2})}) {
    CHECK(hamiltonian(p, vec({0.3, 0.6}), q) == doctest::Approx(legendre_brute(p, vec({0.3, 0.6}), q, 3, 600)).epsilon(1e-4));
    const Vec x = vec({0.15, 0.6});
    CHECK(hamiltonian(g, x, q) - g.drift(x).dot(q) ==
          doctest::Approx(legendre_brute(g, x, q, 3, 600)).epsilon(1e-4));
  }
  CHECK(hamiltonian(l, vec({0.2}), vec({1.3})) - 0.5 * 1.3 ==
        doctest::Approx(legendre_brute(l, vec({0.2}), vec({1.3}), 4, 40000)).epsilon(1e-6));
}

TEST_CASE("optimal control maximizes p.Fa - L") {
  CHECK(optimal_control(line(0, 0), vec({0.0}), vec({0.0})).a.norm() == 0.0);
  const OptimalControl free = optimal_control(line(0, 0, 5.0), vec({0.0}), vec({3.0}));
  CHECK(free.a[0] == doctest::Approx(3.0));
  CHECK_FALSE(free.clipped);
  const OptimalControl clip = optimal_control(line(0, 0, 2.0), vec({0.0}), vec({3.0}));
  CHECK(clip.a[0] == doctest::Approx(2.0));
  CHECK(clip.clipped);

  Mat G(2, 2);
  G << 2.0, 0.3, 0.3, 1.0;
  const AffineSystem p = plane(G, 0.0);
  const Vec x = vec({0.1, 0.1});
  const Vec q = vec({1.0, -0.5});
  const Vec a = optimal_control(p, x, q).a;
  const double value = q.dot(a) - lagrangian(p, x, a);
  CHECK(value == doctest::Approx(hamiltonian(p, x, q)));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.1);
  for (int k = 0; k < 100; ++k) {
    const Vec b = a + vec({n(rng), n(rng)});
    CHECK(q.dot(b) - lagrangian(p, x, b) <= value + 1e-15);
  }
}

TEST_CASE("lagrangian") {
  const AffineSystem e = make_system("eikonal1d");
  CHECK(lagrangian(e, vec({0.3}), vec({0.0})) == doctest::Approx(e.potential(vec({0.3}))));
  CHECK(lagrangian(plane(Mat::Identity(2, 2), 0.0), vec({0, 0}), vec({1, 1})) == doctest::Approx(1.0));
  CHECK(lagrangian(plane(vec({2, 1}).asDiagonal(), 0.5), vec({0, 0}), vec({1, 1})) == doctest::Approx(2.0));
}

TEST_CASE("dynamics") {
  const AffineSystem g = make_system("grushin2d", {{"beta", 0.3}});
  CHECK(dynamics(g, vec({0.4, 0.1}), vec({0, 0})).isApprox(vec({0, -0.3})));
  CHECK(dynamics(g, vec({0.0, 0.1}), vec({1, 0})).isApprox(vec({-1, -0.3})));
  CHECK(dynamics(line(0.6, 0), vec({0.2}), vec({-0.6})).norm() < 1e-15);
}

TEST_CASE("control sample sets") {
  for (int m : {1, 2, 3}) {
    const auto s = control_samples(m, 1.5, 6);
    CHECK(s.front().norm() == 0.0);
    for (const Vec& a : s) CHECK(a.norm() <= 1.5 + 1e-12);
  }
  const auto s1 = control_samples(1, 2.0, 4);
  CHECK(s1.size() == 9);

  const auto small = control_lattice(2, 1.0, 0.25);
  const auto big = control_lattice(2, 2.0, 0.25);
  CHECK(small.front().norm() == 0.0);
  CHECK(big.size() > small.size());
  for (const Vec& a : small) {
    bool found = false;
    for (const Vec& b : big) found = found || (a - b).norm() < 1e-14;
    CHECK(found);
  }
}

TEST_CASE("automatic control radius") {
  const TorusGrid g({64});
  // osc l = 2, tau = 1, b = 0: R = 2 max(1, sqrt(4)) = 4
  CHECK(resolve_control_radius(make_system("eikonal1d"), g) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(resolve_control_radius(make_system("eikonal1d", {{"control_radius", 1.5}}), g) == 1.5);
  CHECK(resolve_control_radius(make_system("eikonal1d", {{"bounded", 1}, {"control_radius", 0.7}}), g) == 0.7);
  const PotentialRange r = potential_range(make_system("eikonal1d"), g);
  CHECK(r.min == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.max == doctest::Approx(2.0));
}

TEST_CASE("catalog") {
  for (const CatalogEntry& e : catalog()) {
    if (e.oscillating) {
      const OscillatingSystem o = make_oscillating(e.name);
      CHECK(o.n == e.dim);
    } else {
      const AffineSystem s = make_system(e.name);
      CHECK(s.n == e.dim);
      for (double x : {0.0, 0.3, 0.77}) s.check_at(Vec::Constant(s.n, x));
    }
  }
  CHECK_THROWS_AS(make_system("nope"), DomainError);
  CHECK_THROWS_AS(make_system("eikonal1d", {{"bogus", 1.0}}), DomainError);
  CHECK(expected_kinks("eikonal1d").size() == 1);
  CHECK(expected_kinks("eikonal1d").front()[0] == 0.0);
}
