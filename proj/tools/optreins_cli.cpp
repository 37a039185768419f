#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "optreins/commands.hpp"

namespace {

struct Flags {
  optreins::RunOptions run;
  double h = 0.0;
  double xmax = 0.0;
  int resolution = 0;
  std::string inner;
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  unsigned workers = 0;
  std::vector<std::string> dominates;
};

void add_common(CLI::App* cmd, Flags& f, bool many_configs) {
  if (many_configs) {
    cmd->add_option("--config", f.run.configs, "Scenario files (repeat or list)")->required()->expected(1, -1);
  } else {
    cmd->add_option("--config", f.run.configs, "Scenario file")->required()->expected(1);
  }
  cmd->add_option("--out", f.run.out, "Output directory (created when missing)");
  cmd->add_option("--h", f.h, "Grid step")->check(CLI::PositiveNumber);
  cmd->add_option("--xmax", f.xmax, "Truncation point of the grid")->check(CLI::PositiveNumber);
  cmd->add_option("--resolution", f.resolution, "Candidate resolution for every family (0 = grid-aligned XL)");
  cmd->add_option("--inner", f.inner, "Inner minimizer")->check(CLI::IsMember({"exhaustive", "fractional"}));
  cmd->add_option("--seed", f.seed, "Simulation seed");
  cmd->add_option("--paths", f.paths, "Monte Carlo paths per surplus level")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", f.workers, "Worker threads (0 = hardware concurrency)");
  cmd->add_flag("--force", f.run.force, "Overwrite existing output files");
}

void apply_overrides(const CLI::App& cmd, Flags& f) {
  auto& o = f.run.overrides;
  if (cmd.count("--h")) o.h = f.h;
  if (cmd.count("--xmax")) o.x_max = f.xmax;
  if (cmd.count("--resolution")) o.resolution = f.resolution;
  if (cmd.count("--inner")) o.inner = f.inner;
  if (cmd.count("--seed")) o.seed = f.seed;
  if (cmd.count("--paths")) o.paths = f.paths;
  if (cmd.count("--workers")) o.workers = f.workers;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal dynamic reinsurance for multi-line Cramer-Lundberg portfolios"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Flags flags;

  auto* solve = app.add_subcommand("solve", "Solve the HJB recursion and write solution and strategy tables");
  add_common(solve, flags, false);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo survival estimates under a solved strategy");
  add_common(simulate, flags, false);
  simulate->add_option("--strategy", flags.run.strategy_csv, "strategy.csv written by solve")->required();
  simulate->add_option("--solution", flags.run.solution_csv, "solution.csv used for the agreement report");
  simulate->add_option("--x0", flags.run.x0, "Initial surplus levels");

  auto* compare = app.add_subcommand("compare", "Solve several scenarios on one grid and combine the curves");
  add_common(compare, flags, true);
  compare->add_option("--dominates", flags.dominates, "Assert A>B: delta_A >= delta_B - 1e-3 everywhere");

  auto* refine = app.add_subcommand("refine", "Self-convergence study over halved grid steps");
  add_common(refine, flags, false);
  refine->add_option("--levels", flags.run.levels, "Number of grid levels")->check(CLI::Range(2, 12));
  refine->add_flag("--truncation", flags.run.truncation, "Also report the effect of doubling x_max");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& d : flags.dominates) {
      const auto gt = d.find('>');
      if (gt == std::string::npos || gt == 0 || gt + 1 == d.size()) {
        std::cerr << "error: --dominates expects A>B, got '" << d << "'\n";
        return 2;
      }
      flags.run.dominance.emplace_back(d.substr(0, gt), d.substr(gt + 1));
    }
    if (*solve) {
      apply_overrides(*solve, flags);
      return optreins::cmd_solve(flags.run, std::cout);
    }
    if (*simulate) {
      apply_overrides(*simulate, flags);
      return optreins::cmd_simulate(flags.run, std::cout);
    }
    if (*compare) {
      apply_overrides(*compare, flags);
      return optreins::cmd_compare(flags.run, std::cout);
    }
    apply_overrides(*refine, flags);
    return optreins::cmd_refine(flags.run, std::cout);
  } catch (...) {
    return optreins::exit_code_for_current_exception(std::cerr);
  }
}
