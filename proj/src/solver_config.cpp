#include "optreins/solver_config.hpp"

#include <cmath>

#include "optreins/errors.hpp"

namespace optreins {

InnerMethod inner_method_from_string(const std::string& name) {
  if (name == "exhaustive") return InnerMethod::exhaustive;
  if (name == "fractional") return InnerMethod::fractional;
  throw ConfigError("inner: expected 'exhaustive' or 'fractional', got '" + name + "'");
}

std::string to_string(InnerMethod method) {
  return method == InnerMethod::exhaustive ? "exhaustive" : "fractional";
}

std::size_t grid_steps(const SolverConfig& config) {
  return static_cast<std::size_t>(std::floor(config.x_max / config.h * (1.0 + 1e-12)));
}

void validate(const SolverConfig& config) {
  if (!(config.h > 0.0) || !std::isfinite(config.h)) throw ConfigError("solver.h: must be positive");
  if (!(config.x_max > 0.0) || !std::isfinite(config.x_max)) throw ConfigError("solver.x_max: must be positive");
  if (grid_steps(config) < 10) throw ConfigError("solver.x_max: must be at least 10 * h");
  const auto& r = config.resolution;
  if (r.proportional < 2) throw ConfigError("solver.resolution.proportional: must be >= 2");
  if (r.xl != 0 && r.xl < 2) throw ConfigError("solver.resolution.xl: must be 0 (grid-aligned) or >= 2");
  if (r.lxl < 2) throw ConfigError("solver.resolution.lxl: must be >= 2");
  if (!std::isfinite(config.premium_floor)) throw ConfigError("solver.premium_floor: must be finite");
  if (!(config.dinkelbach_tol > 0.0)) throw ConfigError("solver.dinkelbach_tol: must be positive");
  if (config.dinkelbach_max_iter < 1) throw ConfigError("solver.dinkelbach_max_iter: must be >= 1");
  if (!std::isfinite(config.candidate_cap)) throw ConfigError("solver.candidate_cap: must be finite");
}

}  // namespace optreins
