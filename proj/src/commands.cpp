#include "optreins/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "optreins/csv_io.hpp"
#include "optreins/errors.hpp"
#include "optreins/hjb_solver.hpp"
#include "optreins/strategy_table.hpp"

namespace optreins {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDominanceTol = 1e-3;

/// Output directory that refuses to overwrite without force. All targets
/// are checked up front so a refused run writes nothing.
class OutputDir {
 public:
  OutputDir(const std::string& dir, bool force, const std::vector<std::string>& names) : dir_(dir) {
    for (const auto& n : names) {
      if (!force && fs::exists(dir_ / n)) {
        throw ConfigError((dir_ / n).string() + ": already exists; pass --force to overwrite");
      }
    }
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path(name) + ": cannot open for writing");
    out << content;
    if (!out) throw ConfigError(path(name) + ": write failed");
    written_.push_back(name);
  }

  const std::vector<std::string>& written() const noexcept { return written_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json to_json(const SolverConfig& c) {
  return {{"h", c.h},
          {"x_max", c.x_max},
          {"grid_steps", grid_steps(c)},
          {"resolution", {{"proportional", c.resolution.proportional}, {"xl", c.resolution.xl}, {"lxl", c.resolution.lxl}}},
          {"premium_floor", c.premium_floor},
          {"inner", to_string(c.inner)},
          {"dinkelbach_tol", c.dinkelbach_tol},
          {"dinkelbach_max_iter", c.dinkelbach_max_iter},
          {"shared_contract", c.shared_contract},
          {"candidate_cap", c.candidate_cap > 0.0 ? c.candidate_cap : c.x_max}};
}

json to_json(const SimConfig& c) {
  return {{"paths", c.n_paths}, {"barrier", c.upper_barrier}, {"max_time", c.max_time}, {"seed", c.seed},
          {"workers", c.workers}};
}

json to_json(const SolverDiagnostics& d) {
  return {{"premium_floor", d.premium_floor},
          {"min_selected_premium", d.min_selected_premium},
          {"max_step_ratio", d.max_step_ratio},
          {"dinkelbach_iterations", d.dinkelbach_iterations},
          {"dinkelbach_fallbacks", d.dinkelbach_fallbacks},
          {"runtime_seconds", d.runtime_seconds}};
}

json manifest_base(const std::string& subcommand, const RunOptions& options, const Scenario& s) {
  return {{"subcommand", subcommand},
          {"config", options.configs},
          {"scenario", s.name},
          {"contract", s.contract == ContractMode::single ? "single" : "per_line"},
          {"solver", to_json(s.solver)},
          {"simulation", to_json(s.simulation)},
          {"output_dir", options.out},
          {"timestamp", utc_timestamp()}};
}

void finish_manifest(OutputDir& dir, json manifest) {
  manifest["files"] = dir.written();
  dir.write("manifest.json", manifest.dump(2) + "\n");
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

const Scenario& single_config(const RunOptions& options, std::vector<Scenario>& store) {
  if (options.configs.size() != 1) throw ConfigError("this command takes exactly one --config");
  store.push_back(load_scenario(options.configs.front(), options.overrides));
  return store.back();
}

std::vector<SolutionTable> solve_all(const std::vector<Scenario>& scenarios, unsigned workers) {
  const std::size_t n = scenarios.size();
  std::vector<SolutionTable> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = solve(scenarios[i].spec, scenarios[i].solver);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

int cmd_solve(const RunOptions& options, std::ostream& log) {
  std::vector<Scenario> store;
  const Scenario& s = single_config(options, store);
  OutputDir dir(options.out, options.force, {"solution.csv", "strategy.csv", "manifest.json"});

  const SolutionTable table = solve(s.spec, s.solver);
  const StrategyTable strategy = extract_strategy(table, s.spec);
  dir.write("solution.csv", render([&](std::ostream& os) { write_solution(os, table); }));
  dir.write("strategy.csv", render([&](std::ostream& os) { write_strategy(os, strategy, table.families); }));

  json manifest = manifest_base("solve", options, s);
  manifest["diagnostics"] = to_json(table.diagnostics);
  manifest["strategy_cells"] = strategy.breakpoints.size();
  finish_manifest(dir, std::move(manifest));

  log << "scenario " << s.name << ": " << table.steps() << " steps, h = " << s.solver.h << ", "
      << strategy.breakpoints.size() << " strategy cells, " << std::fixed << std::setprecision(3)
      << table.diagnostics.runtime_seconds << " s\n";
  log << std::setprecision(6);
  for (double x : s.report_x) log << "  delta(" << format_double(x) << ") = " << table.delta_at(x) << "\n";
  return 0;
}

int cmd_simulate(const RunOptions& options, std::ostream& log) {
  std::vector<Scenario> store;
  const Scenario& s = single_config(options, store);
  if (options.strategy_csv.empty()) throw ConfigError("simulate needs --strategy <csv>");

  std::ifstream in(options.strategy_csv);
  if (!in) throw ConfigError(options.strategy_csv + ": cannot open");
  const StrategyTable table = read_strategy(in, s.spec, options.strategy_csv);

  std::string solution_path = options.solution_csv;
  if (solution_path.empty()) {
    const fs::path sibling = fs::path(options.strategy_csv).parent_path() / "solution.csv";
    if (fs::exists(sibling)) solution_path = sibling.string();
  }
  std::vector<std::string> targets{"estimates.csv", "manifest.json"};
  if (!solution_path.empty()) targets.push_back("agreement.csv");
  OutputDir dir(options.out, options.force, targets);

  const std::vector<double>& x0s = options.x0.empty() ? s.simulate_x0 : options.x0;
  std::vector<SurvivalEstimate> estimates;
  for (double x0 : x0s) estimates.push_back(estimate_survival(s.spec, table, x0, s.simulation));
  dir.write("estimates.csv", render([&](std::ostream& os) { write_estimates(os, estimates, s.simulation); }));

  json manifest = manifest_base("simulate", options, s);
  manifest["strategy_csv"] = options.strategy_csv;
  if (!solution_path.empty()) {
    std::ifstream sin(solution_path);
    if (!sin) throw ConfigError(solution_path + ": cannot open");
    const SolutionTable solution = read_solution(sin, s.spec, solution_path);
    std::size_t agree = 0;
    std::ostringstream os;
    os << "x0,delta,estimate,half_width,within_3_half_widths\n";
    for (const auto& e : estimates) {
      const double d = solution.delta_at(e.x0);
      const bool ok = std::abs(e.estimate - d) <= 3.0 * e.half_width;
      agree += ok;
      os << format_double(e.x0) << ',' << format_double(d) << ',' << format_double(e.estimate) << ','
         << format_double(e.half_width) << ',' << (ok ? 1 : 0) << '\n';
    }
    dir.write("agreement.csv", os.str());
    manifest["solution_csv"] = solution_path;
    manifest["agreement"] = {{"within", agree}, {"total", estimates.size()}};
    log << "agreement: " << agree << " of " << estimates.size() << " estimates within 3 half-widths of delta\n";
  }
  finish_manifest(dir, std::move(manifest));

  log << std::fixed << std::setprecision(6);
  for (const auto& e : estimates) {
    log << "  x0 = " << e.x0 << ": " << e.estimate << " +/- " << e.half_width << '\n';
  }
  return 0;
}

int cmd_compare(const RunOptions& options, std::ostream& log) {
  if (options.configs.size() < 2) throw ConfigError("compare needs at least two --config files");
  std::vector<Scenario> scenarios;
  for (const auto& path : options.configs) scenarios.push_back(load_scenario(path, options.overrides));
  const Scenario& first = scenarios.front();
  for (const auto& s : scenarios) {
    if (s.solver.h != first.solver.h || s.solver.x_max != first.solver.x_max) {
      throw ConfigError("grid mismatch: " + s.source + " uses h = " + format_double(s.solver.h) +
                        ", x_max = " + format_double(s.solver.x_max) + " but " + first.source + " uses h = " +
                        format_double(first.solver.h) + ", x_max = " + format_double(first.solver.x_max));
    }
  }

  std::vector<std::string> names;
  for (const auto& s : scenarios) {
    std::string n = s.name;
    for (int k = 2; std::find(names.begin(), names.end(), n) != names.end(); ++k) n = s.name + "_" + std::to_string(k);
    names.push_back(n);
  }
  for (const auto& [a, b] : options.dominance) {
    for (const auto& n : {a, b}) {
      if (std::find(names.begin(), names.end(), n) == names.end()) {
        throw ConfigError("--dominates: unknown scenario '" + n + "'");
      }
    }
  }

  OutputDir dir(options.out, options.force, {"compare.csv", "compare_summary.csv", "manifest.json"});
  const std::vector<SolutionTable> tables = solve_all(scenarios, first.simulation.workers);
  std::vector<const SolutionTable*> ptrs;
  for (const auto& t : tables) ptrs.push_back(&t);
  dir.write("compare.csv", render([&](std::ostream& os) { write_compare(os, names, ptrs); }));

  std::ostringstream summary;
  summary << "x";
  for (const auto& n : names) summary << ",delta_" << n;
  summary << '\n';
  for (double x : first.report_x) {
    summary << format_double(x);
    for (const auto& t : tables) summary << ',' << format_double(t.delta_at(x));
    summary << '\n';
  }
  dir.write("compare_summary.csv", summary.str());

  auto index = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
  };
  bool all_hold = true;
  json checks = json::array();
  for (const auto& [a, b] : options.dominance) {
    const auto& da = tables[index(a)].delta;
    const auto& db = tables[index(b)].delta;
    double worst = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) worst = std::max(worst, db[i] - da[i]);
    const bool holds = worst <= kDominanceTol;
    all_hold = all_hold && holds;
    checks.push_back({{"dominant", a}, {"dominated", b}, {"max_shortfall", worst}, {"holds", holds}});
    log << (holds ? "holds: " : "FAILS: ") << a << " >= " << b << " (max shortfall " << worst << ")\n";
  }

  json manifest = manifest_base("compare", options, first);
  manifest["scenarios"] = names;
  manifest["dominance_checks"] = checks;
  finish_manifest(dir, std::move(manifest));

  log << "compared " << names.size() << " scenarios on " << tables.front().steps() + 1 << " grid points\n";
  return all_hold ? 0 : 1;
}

int cmd_refine(const RunOptions& options, std::ostream& log) {
  std::vector<Scenario> store;
  const Scenario& s = single_config(options, store);
  OutputDir dir(options.out, options.force, {"refine.csv", "manifest.json"});

  const auto levels = refine(s.spec, s.solver, options.levels);
  dir.write("refine.csv", render([&](std::ostream& os) { write_refine(os, levels); }));

  bool decreasing = true;
  for (std::size_t l = 2; l < levels.size(); ++l) decreasing = decreasing && levels[l].sup_diff < levels[l - 1].sup_diff;

  json manifest = manifest_base("refine", options, s);
  manifest["levels"] = options.levels;
  manifest["decreasing"] = decreasing;
  log << std::scientific << std::setprecision(3);
  for (const auto& l : levels) log << "  h = " << l.h << ": sup_diff = " << l.sup_diff << '\n';
  if (options.truncation) {
    const double change = truncation_change(s.spec, s.solver);
    manifest["truncation_change"] = change;
    log << "  doubling x_max changes delta by at most " << change << '\n';
  }
  finish_manifest(dir, std::move(manifest));

  if (!decreasing) {
    throw SolverError(SolverError::Kind::invariant_violation,
                      "refinement sup-differences are not strictly decreasing");
  }
  return 0;
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace optreins
