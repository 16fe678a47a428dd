#pragma once

#include "ergodic/system_model.hpp"

#include <map>
#include <string>
#include <vector>

namespace ergodic {

using ScenarioParams = std::map<std::string, double>;

struct CatalogEntry {
  std::string name;
  std::string description;
  bool oscillating = false;
  int dim = 1;
  ScenarioParams defaults;
};

/// Every scenario known to the catalog.
const std::vector<CatalogEntry>& catalog();

/// Throws DomainError for unknown names.
const CatalogEntry& catalog_entry(const std::string& name);

/// Defaults overlaid with `overrides`; unknown parameter names are rejected.
ScenarioParams resolve_params(const std::string& name, const ScenarioParams& overrides);

/// Common parameters of every scenario:
///   bounded        0: A = R^m with quadratic cost, 1: A = B_m(control_radius)
///   control_radius truncation (quadratic, 0 = automatic) or ball radius
///   shells         control sample shells
AffineSystem make_system(const std::string& name, const ScenarioParams& overrides = {});
OscillatingSystem make_oscillating(const std::string& name, const ScenarioParams& overrides = {});

/// Points where the critical solution of a scenario is expected to have a
/// kink (empty when unknown).
std::vector<Vec> expected_kinks(const std::string& name, const ScenarioParams& overrides = {});

}  // namespace ergodic
