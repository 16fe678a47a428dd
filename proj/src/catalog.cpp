#include "ergodic/catalog.hpp"

#include <cmath>
#include <numbers>

namespace ergodic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const ScenarioParams kControlDefaults{{"bounded", 0.0}, {"control_radius", 0.0}, {"shells", 16.0}};

ScenarioParams with_controls(ScenarioParams p, double shells = 16.0) {
  p.emplace("shells", shells);
  for (const auto& [k, v] : kControlDefaults) p.emplace(k, v);
  return p;
}

ControlSpec control_from(const ScenarioParams& p) {
  const int shells = static_cast<int>(std::lround(p.at("shells")));
  if (shells < 1) throw DomainError("shells must be >= 1");
  const double r = p.at("control_radius");
  if (r < 0.0) throw DomainError("control_radius must be >= 0");
  if (p.at("bounded") != 0.0) {
    if (!(r > 0.0)) throw DomainError("bounded controls need control_radius > 0");
    return BoundedControl{r, shells};
  }
  return QuadraticControl{r, shells};
}

MatrixFieldFn identity_metric(int m) {
  return [m](const Vec&) -> Mat { return Mat::Identity(m, m); };
}

VectorFieldFn constant_drift(Vec b) {
  return [b](const Vec&) -> Vec { return b; };
}

ScalarFn cos_potential(double l0, double l1) {
  return [l0, l1](const Vec& x) {
    double s = 0.0;
    for (int j = 0; j < x.size(); ++j) s += std::cos(kTwoPi * x[j]);
    return l0 + l1 * s;
  };
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries{
      {"eikonal1d", "b = 0, F = 1, G = 1, l = l0 + l1 cos 2pi x", false, 1,
       with_controls({{"l0", 1.0}, {"l1", 1.0}})},
      {"drift1d", "b = c, F = 1, G = 1, l = l0 + l1 cos 2pi x", false, 1,
       with_controls({{"c", 0.5}, {"l0", 1.0}, {"l1", 1.0}})},
      {"grushin2d", "f1 = (1,0), f2 = (0, sin 2pi x1), b = (0, beta), l = l0 + l1 (cos 2pi x1 + cos 2pi x2)",
       false, 2, with_controls({{"beta", 0.0}, {"l0", 0.5}, {"l1", 0.25}}, 8.0)},
      {"highorder2d", "f1 = (1,0), f2 = (0, sin^k 2pi x1), l = l0 + l1 (cos 2pi x1 + cos 2pi x2)", false,
       2, with_controls({{"k", 2.0}, {"beta", 0.0}, {"l0", 0.5}, {"l1", 0.25}}, 8.0)},
      {"single2d", "one field f1 = (1,0) on the 2-torus, l = l0 + l1 (cos 2pi x1 + cos 2pi x2)", false,
       2, with_controls({{"l0", 0.5}, {"l1", 0.25}}, 8.0)},
      {"fullrank2d", "F = I on the 2-torus, b = 0, l = l0 + l1 (cos 2pi x1 + cos 2pi x2)", false, 2,
       with_controls({{"l0", 0.5}, {"l1", 0.25}})},
      {"osc1d",
       "f = 0, sigma = 1, g = a sin 2pi z + (1 + s sin 2pi z)(1 - cos 2pi x), h = c sin 2pi z + cos 2pi x",
       true, 1, with_controls({{"a", 0.15}, {"s", 0.5}, {"c", 0.2}})},
      {"osc2d",
       "Grushin fields, g = a sin 2pi z1 + (1 + s sin 2pi z2)(1 - (cos 2pi x1 + cos 2pi x2)/2), "
       "h = c sin 2pi z1 + cos 2pi x1 cos 2pi x2",
       true, 2, with_controls({{"a", 0.15}, {"s", 0.5}, {"c", 0.2}}, 8.0)},
      {"const1d", "f = 0, sigma = 1, g = c, h = c (no fast variable)", true, 1,
       with_controls({{"c", 0.5}})},
  };
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const CatalogEntry& e : catalog())
    if (e.name == name) return e;
  throw DomainError("unknown scenario '" + name + "'");
}

ScenarioParams resolve_params(const std::string& name, const ScenarioParams& overrides) {
  const CatalogEntry& e = catalog_entry(name);
  ScenarioParams p = e.defaults;
  for (const auto& [k, v] : overrides) {
    if (!p.count(k)) throw DomainError("scenario '" + name + "' has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw DomainError("parameter '" + k + "' must be finite");
    p[k] = v;
  }
  return p;
}

AffineSystem make_system(const std::string& name, const ScenarioParams& overrides) {
  const CatalogEntry& e = catalog_entry(name);
  if (e.oscillating) throw DomainError("scenario '" + name + "' is a homogenization scenario");
  const ScenarioParams p = resolve_params(name, overrides);
  AffineSystem s;
  s.name = name;
  s.n = e.dim;
  s.control = control_from(p);
  const double l0 = p.at("l0"), l1 = p.at("l1");
  s.potential = cos_potential(l0, l1);

  if (name == "eikonal1d" || name == "drift1d") {
    s.m = 1;
    s.drift = constant_drift(Vec::Constant(1, name == "drift1d" ? p.at("c") : 0.0));
    s.fields = [](const Vec&) -> Mat { return Mat::Identity(1, 1); };
  } else if (name == "grushin2d" || name == "highorder2d") {
    s.m = 2;
    Vec b(2);
    b << 0.0, p.at("beta");
    s.drift = constant_drift(b);
    const double k = name == "highorder2d" ? p.at("k") : 1.0;
    if (k < 1.0 || k != std::floor(k)) throw DomainError("bracket exponent k must be a positive integer");
    const int power = static_cast<int>(k);
    s.fields = [power](const Vec& x) -> Mat {
      Mat F = Mat::Zero(2, 2);
      F(0, 0) = 1.0;
      F(1, 1) = std::pow(std::sin(kTwoPi * x[0]), power);
      return F;
    };
  } else if (name == "single2d") {
    s.m = 1;
    s.drift = constant_drift(Vec::Zero(2));
    s.fields = [](const Vec&) -> Mat {
      Mat F = Mat::Zero(2, 1);
      F(0, 0) = 1.0;
      return F;
    };
  } else {
    s.m = 2;
    s.drift = constant_drift(Vec::Zero(2));
    s.fields = [](const Vec&) -> Mat { return Mat::Identity(2, 2); };
  }
  s.metric = identity_metric(s.m);
  return s;
}

OscillatingSystem make_oscillating(const std::string& name, const ScenarioParams& overrides) {
  const CatalogEntry& e = catalog_entry(name);
  if (!e.oscillating) throw DomainError("scenario '" + name + "' is not a homogenization scenario");
  const ScenarioParams p = resolve_params(name, overrides);
  OscillatingSystem o;
  o.name = name;
  o.n = e.dim;
  o.control = control_from(p);
  o.f = constant_drift(Vec::Zero(e.dim));

  if (name == "const1d") {
    const double c = p.at("c");
    o.m = 1;
    o.fields = [](const Vec&) -> Mat { return Mat::Identity(1, 1); };
    o.g = [c](const Vec&, const Vec&) { return c; };
    o.h = [c](const Vec&, const Vec&) { return c; };
  } else if (name == "osc1d") {
    const double a = p.at("a"), s = p.at("s"), c = p.at("c");
    o.m = 1;
    o.fields = [](const Vec&) -> Mat { return Mat::Identity(1, 1); };
    o.g = [a, s](const Vec& z, const Vec& x) {
      const double sz = std::sin(kTwoPi * z[0]);
      return a * sz + (1.0 + s * sz) * (1.0 - std::cos(kTwoPi * x[0]));
    };
    o.h = [c](const Vec& z, const Vec& x) {
      return c * std::sin(kTwoPi * z[0]) + std::cos(kTwoPi * x[0]);
    };
  } else {
    const double a = p.at("a"), s = p.at("s"), c = p.at("c");
    o.m = 2;
    o.fields = [](const Vec& x) -> Mat {
      Mat F = Mat::Zero(2, 2);
      F(0, 0) = 1.0;
      F(1, 1) = std::sin(kTwoPi * x[0]);
      return F;
    };
    o.g = [a, s](const Vec& z, const Vec& x) {
      return a * std::sin(kTwoPi * z[0]) +
             (1.0 + s * std::sin(kTwoPi * z[1])) *
                 (1.0 - 0.5 * (std::cos(kTwoPi * x[0]) + std::cos(kTwoPi * x[1])));
    };
    o.h = [c](const Vec& z, const Vec& x) {
      return c * std::sin(kTwoPi * z[0]) + std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
    };
  }
  o.metric = identity_metric(o.m);
  return o;
}

std::vector<Vec> expected_kinks(const std::string& name, const ScenarioParams& overrides) {
  if (name != "eikonal1d") return {};
  const ScenarioParams p = resolve_params(name, overrides);
  const double l1 = p.at("l1");
  if (l1 == 0.0) return {};
  return {Vec::Constant(1, l1 > 0.0 ? 0.0 : 0.5)};
}

}  // namespace ergodic
