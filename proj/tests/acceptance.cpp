// Acceptance run: one PASS/FAIL line per criterion, exit status 0 when every
// criterion passes except the documented known failure (6).
//
// usage: acceptance <optreins executable> <configs directory>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "optreins/config.hpp"
#include "optreins/csv_io.hpp"
#include "optreins/errors.hpp"
#include "optreins/hjb_solver.hpp"
#include "optreins/simulator.hpp"
#include "optreins/strategy_table.hpp"

using namespace optreins;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Pinned tolerances.
constexpr double kOracleSupError = 2e-2;
constexpr double kHalvingLow = 0.375;   // err(h/2) / err(h) within 0.5 +- 25%
constexpr double kHalvingHigh = 0.625;
constexpr double kOracleRuntime = 30.0;
constexpr double kEquivalenceTol = 1e-10;
constexpr double kEquivalenceRuntime = 300.0;
constexpr double kDominanceTol = 1e-3;
constexpr double kStateRuntime = 600.0;
constexpr double kAgreementWidths = 3.0;
constexpr int kAgreementNeeded = 19;
constexpr double kAgreementRuntime = 600.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Everything but the last column of each row; drops runtimes from refine.csv.
std::string without_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

class Suite {
 public:
  explicit Suite(fs::path dir) : dir_(std::move(dir)) {}

  const Scenario& scenario(const std::string& name) {
    auto it = scenarios_.find(name);
    if (it == scenarios_.end()) it = scenarios_.emplace(name, load_scenario((dir_ / (name + ".cfg")).string())).first;
    return it->second;
  }

  const SolutionTable& solution(const std::string& name) {
    auto it = solutions_.find(name);
    if (it == solutions_.end()) {
      const auto& s = scenario(name);
      it = solutions_.emplace(name, solve(s.spec, s.solver)).first;
    }
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir_)) {
      if (e.path().extension() == ".cfg") out.push_back(e.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::map<std::string, Scenario> scenarios_;
  std::map<std::string, SolutionTable> solutions_;
};

/// max over the grid of (b - a); a dominates b within tol when this is <= tol.
double shortfall(const SolutionTable& a, const SolutionTable& b) {
  if (a.x.size() != b.x.size()) throw std::runtime_error("dominance check needs a shared grid");
  double worst = -1.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) worst = std::max(worst, b.delta[i] - a.delta[i]);
  return worst;
}

// 1. Oracle correctness without reinsurance.
Outcome oracle_correctness() {
  const PortfolioSpec spec({{ClaimDistribution::exponential(1.0), 1.0, Family::none}}, 3.0, 3.0);
  const auto start = Clock::now();
  double err[2];
  int k = 0;
  for (double h : {0.01, 0.005}) {
    SolverConfig c;
    c.h = h;
    c.x_max = 40.0;
    const auto t = solve(spec, c);
    double sup = 0.0;
    for (std::size_t i = 0; i <= t.steps(); ++i) {
      const double exact = 1.0 - std::exp(-0.75 * t.x[i]) / 4.0;
      sup = std::max(sup, std::abs(t.delta[i] - exact));
    }
    err[k++] = sup;
  }
  const double runtime = since(start);
  const double ratio = err[1] / err[0];
  return {err[0] <= kOracleSupError && ratio >= kHalvingLow && ratio <= kHalvingHigh && runtime < kOracleRuntime,
          "sup error " + fmt(err[0]) + " at h=0.01, " + fmt(err[1]) + " at h=0.005 (ratio " + fmt(ratio) + "), " +
              fmt(runtime) + " s"};
}

// 2. Scheme invariants, re-checked here on every shipped scenario.
Outcome scheme_invariants(Suite& suite) {
  std::size_t violations = 0, solves = 0;
  std::string first;
  for (const auto& name : suite.names()) {
    const auto& s = suite.scenario(name);
    const auto& t = suite.solution(name);
    ++solves;
    const double beta = aggregate_intensity(s.spec);
    const auto bad = [&](const std::string& what) {
      if (violations++ == 0) first = name + ": " + what;
    };
    for (std::size_t i = 0; i <= t.steps(); ++i) {
      if (!(t.slope[i] >= 0.0)) bad("negative slope");
      if (i > 0 && t.f[i] < t.f[i - 1]) bad("f decreasing");
      if (!(t.f[i] <= std::exp(beta * t.x[i] / t.diagnostics.premium_floor))) bad("floor growth bound");
      if (!(t.f[i] <= std::exp(beta * t.x[i] / t.diagnostics.min_selected_premium) * (1 + 1e-12))) {
        bad("selected-premium growth bound");
      }
      if (!(t.delta[i] >= 0.0 && t.delta[i] <= 1.0)) bad("delta outside [0, 1]");
      if (i > 0 && t.delta[i] < t.delta[i - 1]) bad("delta decreasing");
    }
    if (t.delta.back() != 1.0) bad("delta(x_max) != 1");
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(solves) + " solves" +
                               (first.empty() ? "" : " (first: " + first + ")")};
}

// 3. Dinkelbach and exhaustive inner minimizers agree step by step.
Outcome inner_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> rate(0.3, 3.0), scale(0.5, 4.0), shape(2.0, 5.0), intensity(0.2, 3.0),
      eta(0.3, 3.0), extra(0.5, 2.0);
  const Family families[] = {Family::proportional, Family::xl, Family::lxl, Family::none};
  const auto draw = [&]() {
    switch (rng() % 3) {
      case 0: return ClaimDistribution::exponential(rate(rng));
      case 1: return ClaimDistribution::pareto(scale(rng), shape(rng));
      default:
        return ClaimDistribution::mixture({0.5, 0.5}, {ClaimDistribution::exponential(rate(rng)),
                                                       ClaimDistribution::pareto(scale(rng), shape(rng))});
    }
  };

  SolverConfig c;
  c.h = 0.02;
  c.x_max = 3.0;
  c.resolution = {25, 24, 4};  // at most 25 candidates per line, infinite retention included
  int done = 0, redrawn = 0;
  std::size_t steps = 0, max_candidates = 0;
  double worst = 0.0;
  while (done < 50) {
    std::vector<LineSpec> lines;
    for (int k = 0; k < 2; ++k) lines.push_back({draw(), intensity(rng), families[rng() % 4]});
    const double e = eta(rng);
    const PortfolioSpec spec(std::move(lines), e, e + extra(rng));
    SolutionTable t;
    try {
      t = solve(spec, c);
    } catch (const SolverError&) {
      ++redrawn;
      continue;
    }
    StepEngine engine(spec, c, t.steps());
    for (std::size_t k = 0; k < 2; ++k) max_candidates = std::max(max_candidates, engine.options(k).size());
    for (std::size_t i = 0; i <= t.steps(); ++i) {
      const std::span<const double> prefix(t.f.data(), i);
      const double a = engine.minimize(i, prefix, InnerMethod::fractional).value;
      const double b = engine.minimize(i, prefix, InnerMethod::exhaustive).value;
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
      ++steps;
    }
    ++done;
  }
  const double runtime = since(start);
  return {worst <= kEquivalenceTol && max_candidates <= 25 && runtime < kEquivalenceRuntime,
          "max difference " + fmt(worst) + " over " + std::to_string(steps) + " steps of 50 portfolios (" +
              std::to_string(redrawn) + " redrawn for step size), <= " + std::to_string(max_candidates) +
              " candidates/line, " + fmt(runtime) + " s"};
}

// 4. Larger feasible sets dominate on Example 1.
Outcome feasible_set_dominance(Suite& suite) {
  struct Pair {
    std::string a, b;
  };
  std::vector<Pair> pairs;
  for (const std::string f : {"proportional", "xl"}) {
    const std::string base = "example1_" + f;
    for (const std::string one : {"_single", "_shared"}) {
      pairs.push_back({base, base + one});
      pairs.push_back({base + one, "example1_none"});
    }
  }
  double worst = -1.0;
  std::string where;
  for (const auto& p : pairs) {
    const double s = shortfall(suite.solution(p.a), suite.solution(p.b));
    if (s > worst) {
      worst = s;
      where = p.a + " >= " + p.b;
    }
  }
  return {worst <= kDominanceTol, std::to_string(pairs.size()) + " orderings, max shortfall " + fmt(worst) +
                                      " (" + where + ")"};
}

// 5. Example 2 state ordering.
Outcome state_ordering(Suite& suite) {
  const auto st = [](const std::string& s) { return "example2_state_" + s; };
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string s : {"i", "ii", "iii", "iv", "v", "vi", "vii"}) pairs.emplace_back(st("viii"), st(s));
  pairs.emplace_back(st("iii"), st("ii"));  // XL on line 2 beats XL on line 3
  pairs.emplace_back(st("iii"), st("iv"));  // and XL on line 1
  pairs.emplace_back(st("vii"), st("v"));   // XL on {2,3} beats {1,2}
  pairs.emplace_back(st("vii"), st("vi"));  // and {1,3}
  double worst = -1.0, slowest = 0.0;
  std::string where;
  for (const auto& [a, b] : pairs) {
    const double s = shortfall(suite.solution(a), suite.solution(b));
    slowest = std::max({slowest, suite.solution(a).diagnostics.runtime_seconds,
                        suite.solution(b).diagnostics.runtime_seconds});
    if (s > worst) {
      worst = s;
      where = a + " >= " + b;
    }
  }
  return {worst <= kDominanceTol && slowest < kStateRuntime,
          std::to_string(pairs.size()) + " orderings, max shortfall " + fmt(worst) + " (" + where +
              "), slowest state " + fmt(slowest) + " s"};
}

// 6. Line-1 retention in state (viii) shrinks with h.
Outcome retention_degeneracy(Suite& suite) {
  const auto& s = suite.scenario("example2_state_viii");
  double max_m[2], max_finite[2];
  int k = 0;
  for (double h : {0.01, 0.0004}) {
    SolverConfig c = s.solver;
    c.h = h;
    const auto t = solve(s.spec, c);
    max_m[k] = 0.0;
    max_finite[k] = 0.0;
    for (const auto& v : t.strategy) {
      const double m = std::get<ExcessOfLoss>(v[0]).retention;
      max_m[k] = std::max(max_m[k], m);
      if (std::isfinite(m)) max_finite[k] = std::max(max_finite[k], m);
    }
    ++k;
  }
  return {max_m[1] < max_m[0], "max M1 " + format_double(max_m[0]) + " at h=0.01, " + format_double(max_m[1]) +
                                   " at h=0.0004 (largest finite M1 " + fmt(max_finite[0]) + " vs " +
                                   fmt(max_finite[1]) + "; full retention of line 1 is optimal near x=0)"};
}

// 7. Monte Carlo under the extracted strategy agrees with delta.
Outcome simulator_agreement(Suite& suite) {
  const auto start = Clock::now();
  const auto& s = suite.scenario("example1_proportional");
  const auto& t = suite.solution("example1_proportional");
  const auto table = extract_strategy(t, s.spec);
  int within = 0;
  for (double x0 : s.simulate_x0) {
    const auto e = estimate_survival(s.spec, table, x0, s.simulation);
    if (std::abs(e.estimate - t.delta_at(x0)) <= kAgreementWidths * e.half_width) ++within;
  }
  const double runtime = since(start) + t.diagnostics.runtime_seconds;
  return {within >= kAgreementNeeded && s.simulate_x0.size() == 20 && runtime < kAgreementRuntime,
          std::to_string(within) + " of " + std::to_string(s.simulate_x0.size()) + " levels within 3 half-widths (" +
              std::to_string(s.simulation.n_paths) + " paths, barrier " + fmt(s.simulation.upper_barrier) + "), " +
              fmt(runtime) + " s"};
}

// 8. Self-convergence on Example 1.
Outcome self_convergence(Suite& suite) {
  bool ok = true;
  std::string detail;
  for (const std::string name : {"example1_proportional", "example1_xl", "example1_none"}) {
    const auto& s = suite.scenario(name);
    SolverConfig c = s.solver;
    c.h = 0.05;
    const auto levels = refine(s.spec, c, 3);
    ok = ok && levels[2].sup_diff < levels[1].sup_diff;
    detail += (detail.empty() ? "" : "; ") + name.substr(9) + " " + fmt(levels[1].sup_diff) + " -> " +
              fmt(levels[2].sup_diff);
  }
  return {ok, detail};
}

// 9. Byte-identical CSVs across reruns and worker counts.
Outcome determinism(const std::string& cli, const fs::path& configs) {
  const fs::path tmp = fs::temp_directory_path() / ("optreins_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const std::string xl = (configs / "example1_xl.cfg").string();
  const std::string si = (configs / "example2_state_i.cfg").string();
  const std::string sviii = (configs / "example2_state_viii.cfg").string();
  bool ran = true;
  for (const std::string r : {"a", "b"}) {
    const fs::path d = tmp / r;
    const std::string workers = r == "a" ? "1" : "3";
    ran = ran && run("solve --config " + xl + " --out " + (d / "solve").string());
    ran = ran && run("simulate --config " + xl + " --strategy " + (d / "solve" / "strategy.csv").string() +
                     " --paths 5000 --workers " + workers + " --out " + (d / "sim").string());
    ran = ran && run("compare --config " + si + " " + sviii + " --workers " + workers + " --out " +
                     (d / "cmp").string());
    ran = ran && run("refine --config " + xl + " --h 0.05 --levels 2 --out " + (d / "ref").string());
  }
  std::vector<std::string> files{"solve/solution.csv", "solve/strategy.csv", "sim/estimates.csv",
                                 "sim/agreement.csv",  "cmp/compare.csv",    "cmp/compare_summary.csv"};
  int same = 0;
  for (const auto& f : files) same += ran && slurp(tmp / "a" / f) == slurp(tmp / "b" / f) && !slurp(tmp / "a" / f).empty();
  const bool refine_same =
      ran && without_last_column(slurp(tmp / "a/ref/refine.csv")) == without_last_column(slurp(tmp / "b/ref/refine.csv"));
  fs::remove_all(tmp);
  return {ran && same == static_cast<int>(files.size()) && refine_same,
          std::to_string(same) + " of " + std::to_string(files.size()) +
              " CSVs byte-identical across reruns with 1 vs 3 workers; refine.csv " +
              (refine_same ? "identical" : "differs") + " outside the runtime column"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <optreins executable> <configs directory>\n";
    return 2;
  }
  const std::string cli = argv[1];
  Suite suite(argv[2]);
  const std::set<int> known_failures{6};

  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "oracle correctness", [] { return oracle_correctness(); }},
      {2, "scheme invariants", [&] { return scheme_invariants(suite); }},
      {3, "inner-optimizer equivalence", [] { return inner_equivalence(); }},
      {4, "feasible-set dominance", [&] { return feasible_set_dominance(suite); }},
      {5, "example 2 state ordering", [&] { return state_ordering(suite); }},
      {6, "state (viii) retention degeneracy", [&] { return retention_degeneracy(suite); }},
      {7, "solver/simulator agreement", [&] { return simulator_agreement(suite); }},
      {8, "self-convergence", [&] { return self_convergence(suite); }},
      {9, "determinism", [&] { return determinism(cli, suite.dir()); }},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool known = known_failures.count(c.id) > 0;
    std::printf("criterion %d [%s]: %s  %s%s\n", c.id, c.title, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                !o.pass && known ? "  [known failure, see README]" : "");
    std::fflush(stdout);
    if (!o.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
