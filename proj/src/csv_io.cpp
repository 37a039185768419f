#include "optreins/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "optreins/errors.hpp"

namespace optreins {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> parameter_header(const std::vector<Family>& families) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < families.size(); ++k) {
    for (auto& n : parameter_names(families[k], k + 1)) names.push_back(std::move(n));
  }
  return names;
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (c) out << ',';
    out << format_double(values[c]);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& names) {
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) out << ',';
    out << names[c];
  }
  out << '\n';
}

void append_parameters(std::vector<double>& row, const StrategyVector& s, const std::vector<Family>& families) {
  for (std::size_t k = 0; k < families.size(); ++k) {
    for (double v : parameter_values(s[k], families[k])) row.push_back(v);
  }
}

std::vector<Family> families_of(const PortfolioSpec& spec) {
  std::vector<Family> f;
  for (const auto& line : spec.lines()) f.push_back(line.family);
  return f;
}

/// Parses the per-line parameter columns starting at column `first`.
StrategyVector parse_parameters(const std::vector<double>& row, std::size_t first,
                                const std::vector<Family>& families, const std::string& where) {
  StrategyVector s;
  std::size_t c = first;
  for (Family f : families) {
    const std::size_t n = parameter_names(f, 1).size();
    try {
      s.push_back(from_parameter_values(f, std::span<const double>(row.data() + c, n)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
    c += n;
  }
  return s;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& expected, const std::string& source) {
  if (t.header != expected) {
    std::string want;
    for (const auto& n : expected) want += (want.empty() ? "" : ",") + n;
    throw ConfigError(source + ":1: header does not match the portfolio; expected '" + want + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("malformed number '" + std::string(text) + "'");
  }
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw ConfigError("missing CSV column '" + name + "'");
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected " + std::to_string(t.header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        row.push_back(parse_double(f));
      } catch (const ConfigError& e) {
        throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ConfigError(source + ": empty CSV");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  return read_csv(in, path);
}

void write_solution(std::ostream& out, const SolutionTable& table) {
  std::vector<std::string> header{"x", "f", "slope", "delta"};
  for (auto& n : parameter_header(table.families)) header.push_back(std::move(n));
  write_header(out, header);
  std::vector<double> row;
  for (std::size_t i = 0; i < table.x.size(); ++i) {
    row = {table.x[i], table.f[i], table.slope[i], table.delta[i]};
    append_parameters(row, table.strategy[i], table.families);
    write_row(out, row);
  }
}

SolutionTable read_solution(std::istream& in, const PortfolioSpec& spec, const std::string& source) {
  const CsvTable csv = read_csv(in, source);
  const auto families = families_of(spec);
  std::vector<std::string> header{"x", "f", "slope", "delta"};
  for (auto& n : parameter_header(families)) header.push_back(std::move(n));
  expect_header(csv, header, source);
  if (csv.rows.size() < 2) throw ConfigError(source + ": a solution needs at least two grid points");

  SolutionTable t;
  t.families = families;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    t.x.push_back(row[0]);
    t.f.push_back(row[1]);
    t.slope.push_back(row[2]);
    t.delta.push_back(row[3]);
    t.strategy.push_back(parse_parameters(row, 4, families, source + ":" + std::to_string(r + 2)));
    t.premium.push_back(net_premium(spec, t.strategy.back()));
  }
  t.h = t.x[1] - t.x[0];
  return t;
}

void write_strategy(std::ostream& out, const StrategyTable& table, const std::vector<Family>& families) {
  std::vector<std::string> header{"x_start"};
  for (auto& n : parameter_header(families)) header.push_back(std::move(n));
  write_header(out, header);
  std::vector<double> row;
  for (std::size_t c = 0; c < table.breakpoints.size(); ++c) {
    row = {table.breakpoints[c]};
    append_parameters(row, table.vectors[c], families);
    write_row(out, row);
  }
}

StrategyTable read_strategy(std::istream& in, const PortfolioSpec& spec, const std::string& source) {
  const CsvTable csv = read_csv(in, source);
  const auto families = families_of(spec);
  std::vector<std::string> header{"x_start"};
  for (auto& n : parameter_header(families)) header.push_back(std::move(n));
  expect_header(csv, header, source);
  if (csv.rows.empty()) throw ConfigError(source + ": strategy table has no cells");

  std::vector<double> breakpoints;
  std::vector<StrategyVector> vectors;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    breakpoints.push_back(csv.rows[r][0]);
    vectors.push_back(parse_parameters(csv.rows[r], 1, families, source + ":" + std::to_string(r + 2)));
  }
  try {
    return make_strategy_table(spec, std::move(breakpoints), std::move(vectors));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

void write_estimates(std::ostream& out, const std::vector<SurvivalEstimate>& estimates, const SimConfig& config) {
  out << "x0,estimate,half_width,censored_fraction,n_paths,seed\n";
  for (const auto& e : estimates) {
    out << format_double(e.x0) << ',' << format_double(e.estimate) << ',' << format_double(e.half_width) << ','
        << format_double(e.censored_fraction) << ',' << config.n_paths << ',' << config.seed << '\n';
  }
}

void write_compare(std::ostream& out, const std::vector<std::string>& names,
                   const std::vector<const SolutionTable*>& tables) {
  if (names.size() != tables.size() || tables.empty()) {
    throw std::invalid_argument("write_compare: one name per table required");
  }
  std::vector<std::string> header{"x"};
  for (const auto& n : names) header.push_back("delta_" + n);
  write_header(out, header);
  const auto& grid = tables.front()->x;
  for (const auto* t : tables) {
    if (t->x != grid) throw std::invalid_argument("write_compare: tables are on different grids");
  }
  std::vector<double> row;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    row = {grid[i]};
    for (const auto* t : tables) row.push_back(t->delta[i]);
    write_row(out, row);
  }
}

void write_refine(std::ostream& out, const std::vector<ConvergenceLevel>& levels) {
  out << "h,sup_diff,runtime_seconds\n";
  for (const auto& l : levels) {
    out << format_double(l.h) << ',' << format_double(l.sup_diff) << ',' << format_double(l.runtime_seconds) << '\n';
  }
}

}  // namespace optreins
