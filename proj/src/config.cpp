#include "optreins/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include "optreins/errors.hpp"

namespace optreins {

namespace {

class Reader {
 public:
  explicit Reader(std::string name) : name_(std::move(name)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << name_ << ":" << node.Mark().line + 1 << ": " << field << ": " << msg;
    throw ConfigError(os.str());
  }

  void require_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(node, field, "expected a mapping");
  }

  void allow_keys(const YAML::Node& node, const std::string& field, std::initializer_list<const char*> keys) const {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        fail(kv.first, field.empty() ? key : field + "." + key, "unknown key");
      }
    }
  }

  YAML::Node child(const YAML::Node& node, const char* key, const std::string& field) const {
    const YAML::Node c = node[key];
    if (!c) fail(node, field, "missing required key");
    return c;
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, field, "cannot convert '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& field) const { return scalar<double>(node, field); }

  std::vector<double> numbers(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence()) fail(node, field, "expected a list");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(number(node[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  ClaimDistribution distribution(const YAML::Node& node, const std::string& field) const {
    require_map(node, field);
    const auto type = scalar<std::string>(child(node, "type", field + ".type"), field + ".type");
    try {
      if (type == "exponential") {
        allow_keys(node, field, {"type", "rate"});
        return ClaimDistribution::exponential(number(child(node, "rate", field + ".rate"), field + ".rate"));
      }
      if (type == "pareto") {
        allow_keys(node, field, {"type", "scale", "shape"});
        return ClaimDistribution::pareto(number(child(node, "scale", field + ".scale"), field + ".scale"),
                                         number(child(node, "shape", field + ".shape"), field + ".shape"));
      }
      if (type == "mixture") {
        allow_keys(node, field, {"type", "weights", "components"});
        auto weights = numbers(child(node, "weights", field + ".weights"), field + ".weights");
        const YAML::Node comps = child(node, "components", field + ".components");
        if (!comps.IsSequence()) fail(comps, field + ".components", "expected a list");
        std::vector<ClaimDistribution> components;
        for (std::size_t i = 0; i < comps.size(); ++i) {
          components.push_back(distribution(comps[i], field + ".components[" + std::to_string(i) + "]"));
        }
        return ClaimDistribution::mixture(std::move(weights), std::move(components));
      }
    } catch (const std::invalid_argument& e) {
      fail(node, field, e.what());
    }
    fail(node, field + ".type", "expected exponential, pareto or mixture, got '" + type + "'");
  }

  Family family(const YAML::Node& node, const std::string& field) const {
    try {
      return family_from_string(scalar<std::string>(node, field));
    } catch (const std::invalid_argument& e) {
      fail(node, field, e.what());
    }
  }

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

SolverConfig parse_solver(const Reader& r, const YAML::Node& node) {
  SolverConfig c;
  if (!node) return c;
  r.require_map(node, "solver");
  r.allow_keys(node, "solver",
               {"h", "x_max", "resolution", "premium_floor", "inner", "dinkelbach_tol", "dinkelbach_max_iter",
                "shared_contract", "candidate_cap"});
  if (node["h"]) c.h = r.number(node["h"], "solver.h");
  if (node["x_max"]) c.x_max = r.number(node["x_max"], "solver.x_max");
  if (const auto res = node["resolution"]) {
    r.require_map(res, "solver.resolution");
    r.allow_keys(res, "solver.resolution", {"proportional", "xl", "lxl"});
    if (res["proportional"]) c.resolution.proportional = r.scalar<int>(res["proportional"], "solver.resolution.proportional");
    if (res["xl"]) c.resolution.xl = r.scalar<int>(res["xl"], "solver.resolution.xl");
    if (res["lxl"]) c.resolution.lxl = r.scalar<int>(res["lxl"], "solver.resolution.lxl");
  }
  if (node["premium_floor"]) c.premium_floor = r.number(node["premium_floor"], "solver.premium_floor");
  if (node["inner"]) {
    try {
      c.inner = inner_method_from_string(r.scalar<std::string>(node["inner"], "solver.inner"));
    } catch (const ConfigError& e) {
      r.fail(node["inner"], "solver.inner", e.what());
    }
  }
  if (node["dinkelbach_tol"]) c.dinkelbach_tol = r.number(node["dinkelbach_tol"], "solver.dinkelbach_tol");
  if (node["dinkelbach_max_iter"]) {
    c.dinkelbach_max_iter = r.scalar<int>(node["dinkelbach_max_iter"], "solver.dinkelbach_max_iter");
  }
  if (node["shared_contract"]) c.shared_contract = r.scalar<bool>(node["shared_contract"], "solver.shared_contract");
  if (node["candidate_cap"]) c.candidate_cap = r.number(node["candidate_cap"], "solver.candidate_cap");
  return c;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name, const Overrides& overrides) {
  const Reader r(name);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(name + ":" + std::to_string(e.mark.line + 1) + ": parse error: " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(name + ": top level must be a mapping");
  r.allow_keys(root, "", {"name", "eta", "eta1", "contract", "lines", "solver", "simulation", "report"});

  const double eta = r.number(r.child(root, "eta", "eta"), "eta");
  const double eta1 = r.number(r.child(root, "eta1", "eta1"), "eta1");

  const YAML::Node lines_node = r.child(root, "lines", "lines");
  if (!lines_node.IsSequence()) r.fail(lines_node, "lines", "expected a list");
  std::vector<LineSpec> lines;
  for (std::size_t k = 0; k < lines_node.size(); ++k) {
    const std::string field = "lines[" + std::to_string(k) + "]";
    const YAML::Node ln = lines_node[k];
    r.require_map(ln, field);
    r.allow_keys(ln, field, {"intensity", "distribution", "family"});
    lines.push_back(LineSpec{r.distribution(r.child(ln, "distribution", field + ".distribution"), field + ".distribution"),
                             r.number(r.child(ln, "intensity", field + ".intensity"), field + ".intensity"),
                             r.family(r.child(ln, "family", field + ".family"), field + ".family")});
  }

  ContractMode contract = ContractMode::per_line;
  if (const auto c = root["contract"]) {
    const auto mode = r.scalar<std::string>(c, "contract");
    if (mode == "single") {
      contract = ContractMode::single;
    } else if (mode != "per_line") {
      r.fail(c, "contract", "expected per_line or single, got '" + mode + "'");
    }
  }

  std::optional<PortfolioSpec> spec;
  try {
    spec.emplace(std::move(lines), eta, eta1);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name + ": " + e.what());
  }
  if (contract == ContractMode::single) {
    const Family f = spec->lines().front().family;
    for (const auto& line : spec->lines()) {
      if (line.family != f) r.fail(root["contract"], "contract", "single contract requires one family on all lines");
    }
    *spec = single_contract(*spec, f);
  }

  SolverConfig solver = parse_solver(r, root["solver"]);
  if (overrides.h) solver.h = *overrides.h;
  if (overrides.x_max) solver.x_max = *overrides.x_max;
  if (overrides.resolution) {
    solver.resolution.proportional = *overrides.resolution;
    solver.resolution.xl = *overrides.resolution;
    solver.resolution.lxl = *overrides.resolution;
  }
  if (overrides.inner) solver.inner = inner_method_from_string(*overrides.inner);
  validate(solver);

  SimConfig sim;
  std::vector<double> x0;
  if (const auto s = root["simulation"]) {
    r.require_map(s, "simulation");
    r.allow_keys(s, "simulation", {"paths", "barrier", "max_time", "seed", "workers", "x0"});
    if (s["paths"]) sim.n_paths = r.scalar<std::size_t>(s["paths"], "simulation.paths");
    if (s["barrier"]) sim.upper_barrier = r.number(s["barrier"], "simulation.barrier");
    if (s["max_time"]) sim.max_time = r.number(s["max_time"], "simulation.max_time");
    if (s["seed"]) sim.seed = r.scalar<std::uint64_t>(s["seed"], "simulation.seed");
    if (s["workers"]) sim.workers = r.scalar<unsigned>(s["workers"], "simulation.workers");
    if (s["x0"]) x0 = r.numbers(s["x0"], "simulation.x0");
  }
  if (overrides.seed) sim.seed = *overrides.seed;
  if (overrides.paths) sim.n_paths = *overrides.paths;
  if (overrides.workers) sim.workers = *overrides.workers;
  if (sim.upper_barrier <= 0.0) sim.upper_barrier = 1.5 * solver.x_max;
  if (sim.n_paths < 1) throw ConfigError(name + ": simulation.paths: must be >= 1");
  if (x0.empty()) {
    for (int k = 0; k < 20; ++k) x0.push_back(solver.h * std::round(k * solver.x_max / 20.0 / solver.h));
  }

  std::vector<double> report;
  if (const auto rep = root["report"]) {
    r.require_map(rep, "report");
    r.allow_keys(rep, "report", {"x"});
    if (rep["x"]) report = r.numbers(rep["x"], "report.x");
  }
  if (report.empty()) report = {0.0, 0.25 * solver.x_max, 0.5 * solver.x_max, solver.x_max};

  std::string label = name;
  if (const auto n = root["name"]) label = r.scalar<std::string>(n, "name");

  return Scenario{label, name, contract, std::move(*spec), solver, sim, std::move(report), std::move(x0)};
}

Scenario load_scenario(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path, overrides);
  if (s.name == path) s.name = std::filesystem::path(path).stem().string();
  return s;
}

}  // namespace optreins
