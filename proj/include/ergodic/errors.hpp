#pragma once

#include <stdexcept>
#include <string>

namespace ergodic {

/// Malformed numerical input: non-finite points, bad sizes, inconsistent data.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested time step moves further than one grid cell per step.
class CflError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solve hit its iteration or time budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_update)
      : std::runtime_error(what), last_update_(last_update) {}
  double last_update() const { return last_update_; }

 private:
  double last_update_;
};

/// A gradient left the momentum range covered by an effective table.
class RangeError : public std::runtime_error {
 public:
  RangeError(const std::string& what, double offending)
      : std::runtime_error(what), offending_(offending) {}
  double offending() const { return offending_; }

 private:
  double offending_;
};

/// Invalid run configuration (parse or validation failure).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ergodic
