#pragma once

#include <cstddef>
#include <string>

namespace optreins {

enum class InnerMethod { exhaustive, fractional };

InnerMethod inner_method_from_string(const std::string& name);
std::string to_string(InnerMethod method);

/// Number of grid points per family's control set. An XL resolution of 0
/// places retentions on the solver grid itself, {0, h, ..., x_max, inf};
/// inside a grid bin the scheme only sees which bin the retention falls in,
/// so the right bin edge (cheapest reinsurance) dominates and this grid is
/// exact for XL.
struct Resolutions {
  int proportional = 101;
  int xl = 0;
  int lxl = 21;
};

struct SolverConfig {
  double h = 0.01;
  double x_max = 10.0;
  Resolutions resolution;
  /// Minimum admissible net premium; <= 0 selects 1e-6 * gross premium.
  double premium_floor = 0.0;
  InnerMethod inner = InnerMethod::fractional;
  /// Dinkelbach stops once N - lambda * D >= -tol * beta * f(s - h).
  double dinkelbach_tol = 1e-13;
  int dinkelbach_max_iter = 100;
  /// Force one common parameter on all lines (all lines must share a family).
  bool shared_contract = false;
  /// Upper end of the XL/LXL parameter grids; <= 0 selects x_max.
  double candidate_cap = 0.0;
};

/// Number of grid steps N = floor(x_max / h), tolerant to representation error.
std::size_t grid_steps(const SolverConfig& config);

/// Throws ConfigError when h, x_max or the resolutions are out of range.
void validate(const SolverConfig& config);

}  // namespace optreins
