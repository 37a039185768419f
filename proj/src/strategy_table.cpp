#include "optreins/strategy_table.hpp"

#include <algorithm>
#include <stdexcept>

namespace optreins {

std::size_t StrategyTable::cell(double surplus) const {
  if (surplus < 0.0) throw std::domain_error("strategy lookup below zero surplus (ruin)");
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), surplus);
  return static_cast<std::size_t>(it - breakpoints.begin()) - 1;
}

void check(const StrategyTable& table) {
  if (table.breakpoints.empty() || table.breakpoints.front() != 0.0) {
    throw std::invalid_argument("strategy table: first breakpoint must be 0");
  }
  if (table.vectors.size() != table.breakpoints.size() || table.premiums.size() != table.breakpoints.size()) {
    throw std::invalid_argument("strategy table: one vector and premium per cell required");
  }
  for (std::size_t c = 1; c < table.breakpoints.size(); ++c) {
    if (!(table.breakpoints[c] > table.breakpoints[c - 1])) {
      throw std::invalid_argument("strategy table: breakpoints must be strictly increasing");
    }
  }
}

StrategyTable make_strategy_table(const PortfolioSpec& spec, std::vector<double> breakpoints,
                                  std::vector<StrategyVector> vectors) {
  StrategyTable t;
  t.breakpoints = std::move(breakpoints);
  t.vectors = std::move(vectors);
  for (const auto& v : t.vectors) t.premiums.push_back(net_premium(spec, v));
  check(t);
  return t;
}

StrategyTable extract_strategy(const SolutionTable& solution, const PortfolioSpec& spec) {
  std::vector<double> breakpoints;
  std::vector<StrategyVector> vectors;
  for (std::size_t i = 0; i < solution.strategy.size(); ++i) {
    if (vectors.empty() || solution.strategy[i] != vectors.back()) {
      breakpoints.push_back(solution.x[i]);
      vectors.push_back(solution.strategy[i]);
    }
  }
  return make_strategy_table(spec, std::move(breakpoints), std::move(vectors));
}

}  // namespace optreins
