#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "optreins/config.hpp"
#include "optreins/csv_io.hpp"
#include "optreins/errors.hpp"

using namespace optreins;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(name: small
eta: 3
eta1: 3.5
lines:
  - intensity: 1
    distribution: {type: exponential, rate: 1}
    family: xl
  - intensity: 2
    distribution: {type: pareto, scale: 3, shape: 3}
    family: proportional
solver:
  h: 0.05
  x_max: 3
  resolution: {proportional: 11}
simulation:
  paths: 3000
  x0: [0, 1, 2]
)";

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("optreins_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(OPTREINS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("scenario parsing fills defaults") {
  const auto s = parse_scenario(kSmall, "small.cfg");
  CHECK(s.name == "small");
  CHECK(s.spec.size() == 2);
  CHECK(s.solver.h == 0.05);
  CHECK(s.solver.resolution.proportional == 11);
  CHECK(s.solver.resolution.xl == 0);
  CHECK(s.simulation.upper_barrier == 4.5);
  CHECK(s.simulation.n_paths == 3000);
  CHECK(s.report_x == std::vector<double>{0.0, 0.75, 1.5, 3.0});

  Overrides o;
  o.h = 0.1;
  o.resolution = 4;
  o.seed = 5;
  const auto t = parse_scenario(kSmall, "small.cfg", o);
  CHECK(t.solver.h == 0.1);
  CHECK(t.solver.resolution.proportional == 4);
  CHECK(t.solver.resolution.lxl == 4);
  CHECK(t.simulation.seed == 5);

  const auto one = parse_scenario(replace(replace(kSmall, "family: proportional", "family: xl"), "eta1: 3.5",
                                          "eta1: 3.5\ncontract: single"),
                                  "s.cfg");
  CHECK(one.contract == ContractMode::single);
  CHECK(one.spec.size() == 1);
  CHECK(one.spec.lines()[0].intensity == 3.0);
}

TEST_CASE("scenario errors carry file, line and field") {
  CHECK(error_of(replace(kSmall, "rate: 1}", "rate: -1}")).find("t.cfg:") == 0);
  CHECK(error_of(replace(kSmall, "rate: 1}", "rate: -1}")).find("lines[0].distribution") != std::string::npos);
  CHECK(error_of(replace(kSmall, "family: xl", "family: quota")) .find("t.cfg:7: lines[0].family") == 0);
  CHECK(error_of(replace(kSmall, "  h: 0.05", "  hh: 0.05")).find("solver.hh: unknown key") != std::string::npos);
  CHECK(error_of(replace(kSmall, "eta: 3\n", "")).find("eta: missing required key") != std::string::npos);
  CHECK(error_of(replace(kSmall, "intensity: 2", "intensity: 0")).find("lines[1].intensity") != std::string::npos);
  CHECK(error_of(replace(kSmall, "  h: 0.05", "  h: abc")).find("solver.h") != std::string::npos);
  CHECK(error_of(replace(kSmall, "  h: 0.05", "  h: -1")) != "no error");
  CHECK(error_of(replace(kSmall, "eta1: 3.5", "eta1: 3.5\ncontract: single")).find("contract") != std::string::npos);
  CHECK(error_of("lines: [") .find("parse error") != std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("numbers round-trip through CSV text") {
  for (double v : {0.0, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
  CHECK_THROWS_AS(parse_double(""), ConfigError);
}

TEST_CASE("solution and strategy tables round-trip") {
  const auto s = parse_scenario(kSmall, "small.cfg");
  const auto sol = solve(s.spec, s.solver);
  std::stringstream a;
  write_solution(a, sol);
  const auto back = read_solution(a, s.spec, "mem");
  CHECK(back.x == sol.x);
  CHECK(back.f == sol.f);
  CHECK(back.slope == sol.slope);
  CHECK(back.delta == sol.delta);
  CHECK(back.strategy == sol.strategy);

  const auto table = extract_strategy(sol, s.spec);
  std::stringstream b;
  write_strategy(b, table, sol.families);
  CHECK(b.str().rfind("x_start,M1,b2\n", 0) == 0);
  const auto t2 = read_strategy(b, s.spec, "mem");
  CHECK(t2.breakpoints == table.breakpoints);
  CHECK(t2.vectors == table.vectors);
  CHECK(t2.premiums == table.premiums);

  std::stringstream bad("x_start,M1,M2\n0,1,1\n");
  CHECK_THROWS_AS(read_strategy(bad, s.spec, "mem"), ConfigError);
  std::stringstream ragged("x_start,M1,b2\n0,1\n");
  CHECK_THROWS_AS(read_strategy(ragged, s.spec, "mem"), ConfigError);
}

TEST_CASE("command line exit codes and output handling") {
  TempDir tmp;
  const auto cfg = tmp.write("small.cfg", kSmall).string();
  const auto out = (tmp.path / "nested" / "run").string();

  REQUIRE(run("solve --config " + cfg + " --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "solution.csv"));
  CHECK(fs::exists(fs::path(out) / "strategy.csv"));
  CHECK(fs::exists(fs::path(out) / "manifest.json"));
  const auto first = slurp(fs::path(out) / "solution.csv");

  // Refuses to overwrite, then reruns byte-identically with --force.
  CHECK(run("solve --config " + cfg + " --out " + out) == 2);
  REQUIRE(run("solve --config " + cfg + " --out " + out + " --force") == 0);
  CHECK(slurp(fs::path(out) / "solution.csv") == first);

  const auto sim = (tmp.path / "sim").string();
  REQUIRE(run("simulate --config " + cfg + " --strategy " + out + "/strategy.csv --out " + sim) == 0);
  CHECK(fs::exists(fs::path(sim) / "estimates.csv"));
  CHECK(fs::exists(fs::path(sim) / "agreement.csv"));
  const auto est = slurp(fs::path(sim) / "estimates.csv");
  REQUIRE(run("simulate --config " + cfg + " --strategy " + out + "/strategy.csv --out " + sim +
              " --force --workers 3") == 0);
  CHECK(slurp(fs::path(sim) / "estimates.csv") == est);

  // Configuration problems exit 2.
  CHECK(run("solve --config " + tmp.path.string() + "/missing.cfg --out " + out + " --force") == 2);
  const auto broken = tmp.write("broken.cfg", replace(kSmall, "rate: 1}", "rate: 0}")).string();
  CHECK(run("solve --config " + broken + " --out " + out + " --force") == 2);
  CHECK(run("solve --out " + out) == 2);
  CHECK(run("solve --config " + cfg + " --inner greedy") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("--help") == 0);

  // Solver failures exit 3.
  const auto tight = tmp.write("tight.cfg", replace(replace(kSmall, "eta1: 3.5", "eta1: 3"), "family: xl",
                                                    "family: proportional"))
                         .string();
  CHECK(run("solve --config " + tight + " --out " + out + " --force --h 0.2 --resolution 101") == 3);

  // Simulation failures exit 4.
  const auto censor = tmp.write("censor.cfg", replace(kSmall, "paths: 3000", "paths: 3000\n  max_time: 0.01")).string();
  CHECK(run("simulate --config " + censor + " --strategy " + out + "/strategy.csv --out " + sim + " --force") == 4);

  // Compare needs a shared grid.
  const auto coarse = tmp.write("coarse.cfg", replace(kSmall, "h: 0.05", "h: 0.1")).string();
  CHECK(run("compare --config " + cfg + " " + coarse + " --out " + sim + "/cmp") == 2);
  const auto none = tmp.write("none.cfg", replace(replace(replace(kSmall, "name: small", "name: none"), "family: xl",
                                                          "family: none"),
                                                  "family: proportional", "family: none"))
                        .string();
  CHECK(run("compare --config " + cfg + " " + none + " --out " + sim + "/cmp --dominates 'small>none'") == 0);
  CHECK(fs::exists(fs::path(sim) / "cmp" / "compare.csv"));
  CHECK(run("compare --config " + cfg + " " + none + " --out " + sim + "/cmp --force --dominates 'none>small'") == 1);
  CHECK(run("compare --config " + cfg + " " + none + " --out " + sim + "/cmp --force --dominates none") == 2);

  CHECK(run("refine --config " + cfg + " --out " + sim + "/ref --levels 2") == 0);
  CHECK(fs::exists(fs::path(sim) / "ref" / "refine.csv"));
}

TEST_CASE("shipped scenario files parse") {
  for (const auto& entry : fs::directory_iterator(OPTREINS_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_scenario(entry.path().string()));
  }
}
