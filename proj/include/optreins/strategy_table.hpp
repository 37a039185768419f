#pragma once

#include <vector>

#include "optreins/hjb_solver.hpp"
#include "optreins/portfolio.hpp"

namespace optreins {

/// Piecewise-constant feedback strategy. Cell c covers
/// [breakpoints[c], breakpoints[c + 1]) and the last cell extends to +inf.
/// breakpoints[0] is 0 and the sequence is strictly increasing.
struct StrategyTable {
  std::vector<double> breakpoints;
  std::vector<StrategyVector> vectors;
  std::vector<double> premiums;  // net premium of each cell's vector

  std::size_t cell(double surplus) const;
  const StrategyVector& lookup(double surplus) const { return vectors[cell(surplus)]; }
};

/// Throws std::invalid_argument unless the invariants above hold.
void check(const StrategyTable& table);

/// Merges consecutive grid points with equal argmin vectors into one cell.
StrategyTable extract_strategy(const SolutionTable& solution, const PortfolioSpec& spec);

/// Builds a table from breakpoints and vectors, computing cell premiums.
StrategyTable make_strategy_table(const PortfolioSpec& spec, std::vector<double> breakpoints,
                                  std::vector<StrategyVector> vectors);

}  // namespace optreins
