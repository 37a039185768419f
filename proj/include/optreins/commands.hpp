#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "optreins/config.hpp"

namespace optreins {

struct RunOptions {
  std::vector<std::string> configs;
  std::string out = "out";
  bool force = false;
  Overrides overrides;
  std::string strategy_csv;  // simulate
  std::string solution_csv;  // simulate; defaults to solution.csv next to the strategy
  std::vector<double> x0;    // simulate; overrides the scenario's list when non-empty
  int levels = 3;            // refine
  bool truncation = false;   // refine
  /// compare: pairs (a, b) asserting delta_a >= delta_b - 1e-3 pointwise.
  std::vector<std::pair<std::string, std::string>> dominance;
};

/// Each command returns the process exit code for non-exceptional outcomes
/// and lets ConfigError, SolverError and SimulationError propagate.
int cmd_solve(const RunOptions& options, std::ostream& log);
int cmd_simulate(const RunOptions& options, std::ostream& log);
int cmd_compare(const RunOptions& options, std::ostream& log);
int cmd_refine(const RunOptions& options, std::ostream& log);

/// Maps an in-flight exception to the documented exit code (2 config,
/// 3 solver, 4 simulation, 1 anything else) after printing it.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace optreins
