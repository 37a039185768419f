#pragma once

#include <stdexcept>
#include <string>

namespace optreins {

/// Malformed or invalid scenario input (config file, CSV, CLI flags).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { no_admissible_strategy, step_too_large, invariant_violation };

  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace optreins
