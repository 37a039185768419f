#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "optreins/hjb_solver.hpp"
#include "optreins/simulator.hpp"
#include "optreins/strategy_table.hpp"

namespace optreins {

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan"
/// for the non-finite values.
std::string format_double(double v);

/// Inverse of format_double. Throws ConfigError on malformed input.
double parse_double(std::string_view text);

/// Numeric CSV with one header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws ConfigError when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

/// Columns x,f,slope,delta followed by each line's parameters (b1, M2, M3,L3, ...).
void write_solution(std::ostream& out, const SolutionTable& table);

/// Rebuilds grid, values and strategies; diagnostics and config are not stored.
SolutionTable read_solution(std::istream& in, const PortfolioSpec& spec, const std::string& source);

/// Columns x_start followed by each line's parameters, one row per cell.
void write_strategy(std::ostream& out, const StrategyTable& table, const std::vector<Family>& families);

/// Throws ConfigError when the header does not match the portfolio's lines
/// or a row is malformed.
StrategyTable read_strategy(std::istream& in, const PortfolioSpec& spec, const std::string& source);

/// Columns x0,estimate,half_width,censored_fraction,n_paths,seed.
void write_estimates(std::ostream& out, const std::vector<SurvivalEstimate>& estimates, const SimConfig& config);

/// Columns x,delta_<name>,... on the shared grid. All tables must share the grid.
void write_compare(std::ostream& out, const std::vector<std::string>& names,
                   const std::vector<const SolutionTable*>& tables);

/// Columns h,sup_diff,runtime_seconds.
void write_refine(std::ostream& out, const std::vector<ConvergenceLevel>& levels);

}  // namespace optreins
