#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "optreins/portfolio.hpp"
#include "optreins/solver_config.hpp"
#include "optreins/step_engine.hpp"

namespace optreins {

struct SolverDiagnostics {
  double premium_floor = 0.0;
  double min_selected_premium = 0.0;
  double max_step_ratio = 0.0;  // max over steps of beta * h / p_selected
  std::size_t dinkelbach_iterations = 0;
  std::size_t dinkelbach_fallbacks = 0;
  double runtime_seconds = 0.0;
};

/// Output of the finite-difference recursion on the grid x_i = i * h.
struct SolutionTable {
  double h = 0.0;
  std::vector<double> x;
  std::vector<double> f;      // unnormalized, f(0) = 1
  std::vector<double> slope;  // f'_h at each grid point
  std::vector<double> delta;  // f / f(x_N)
  std::vector<StrategyVector> strategy;
  std::vector<double> premium;  // net premium of the selected strategy
  std::vector<Family> families;
  SolverConfig config;
  SolverDiagnostics diagnostics;

  std::size_t steps() const noexcept { return x.empty() ? 0 : x.size() - 1; }

  /// Linear interpolation of delta; clamps to 1 beyond the grid.
  double delta_at(double surplus) const;
};

/// G(ih) = sum_{j=1..i} f((i-j)h) P((j-1)h < Z <= jh), evaluated directly from
/// the mixture bin masses. prefix must hold at least i values.
double convolution(const PortfolioSpec& spec, std::span<const double> prefix, const StrategyVector& s,
                   std::size_t i, double h);

/// beta * (f((i-1)h) (1 - P(Z = 0)) - G(ih)) / p for one candidate, with f(-h)
/// taken as 1 so that i = 0 gives the initial slope. Throws SolverError
/// (no_admissible_strategy) when the premium is below the floor.
double step_objective(const PortfolioSpec& spec, std::span<const double> prefix, const StrategyVector& s,
                      std::size_t i, double h, double premium_floor);

/// Inner minimization at grid index i for a given prefix f(0..(i-1)h).
StepResult minimize_step(const PortfolioSpec& spec, std::span<const double> prefix, std::size_t i,
                         const SolverConfig& config);

StepResult initial_slope(const PortfolioSpec& spec, const SolverConfig& config);

/// Runs the recursion up to x_max, normalizes, and checks the scheme's
/// invariants on every step (nonnegative slopes, growth bound, step-size
/// guard). Violations throw SolverError.
SolutionTable solve(const PortfolioSpec& spec, const SolverConfig& config);

struct ConvergenceLevel {
  double h = 0.0;
  double sup_diff = 0.0;  // vs the previous level on the coarse grid; NaN on the first level
  double runtime_seconds = 0.0;
};

/// Solves at h, h/2, ..., h/2^(levels-1) with a fixed x_max.
std::vector<ConvergenceLevel> refine(const PortfolioSpec& spec, const SolverConfig& config, int levels);

/// Sup-norm difference of delta on the coarser grid. fine.h must be
/// coarse.h / 2^k for some k >= 0 and both tables must share x_max.
double sup_difference(const SolutionTable& coarse, const SolutionTable& fine);

/// Largest change of delta on [0, x_max] when x_max is doubled at fixed h.
double truncation_change(const PortfolioSpec& spec, const SolverConfig& config);

}  // namespace optreins
