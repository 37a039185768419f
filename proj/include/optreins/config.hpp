#pragma once

#include <optional>
#include <string>
#include <vector>

#include "optreins/portfolio.hpp"
#include "optreins/simulator.hpp"
#include "optreins/solver_config.hpp"

namespace optreins {

enum class ContractMode { per_line, single };

/// One scenario file: the portfolio as solved (already reduced to one
/// synthetic line when contract mode is single), solver and simulation
/// settings, and the report points.
struct Scenario {
  std::string name;
  std::string source;
  ContractMode contract = ContractMode::per_line;
  PortfolioSpec spec;
  SolverConfig solver;
  SimConfig simulation;
  std::vector<double> report_x;
  std::vector<double> simulate_x0;
};

/// Command-line overrides applied after parsing and before validation.
struct Overrides {
  std::optional<double> h;
  std::optional<double> x_max;
  std::optional<int> resolution;  // applied to every family
  std::optional<std::string> inner;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<unsigned> workers;
};

/// Parses a scenario file. Every error is a ConfigError whose message starts
/// with "<path>:<line>:" and names the offending field.
Scenario load_scenario(const std::string& path, const Overrides& overrides = {});

/// Same, from text already in memory; name labels messages and outputs.
Scenario parse_scenario(const std::string& text, const std::string& name, const Overrides& overrides = {});

}  // namespace optreins
