#include "optreins/hjb_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "optreins/errors.hpp"

namespace optreins {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

[[noreturn]] void violation(const std::string& what, std::size_t i, double x) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at grid index " << i << " (x = " << x << ")";
  throw SolverError(SolverError::Kind::invariant_violation, os.str());
}

}  // namespace

double SolutionTable::delta_at(double surplus) const {
  if (surplus < 0.0) return 0.0;
  const std::size_t n = steps();
  const double pos = surplus / h;
  if (pos >= static_cast<double>(n)) return 1.0;
  const auto i = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(i);
  return delta[i] + w * (delta[i + 1] - delta[i]);
}

double convolution(const PortfolioSpec& spec, std::span<const double> prefix, const StrategyVector& s,
                   std::size_t i, double h) {
  if (prefix.size() < i) throw std::invalid_argument("convolution: prefix shorter than i");
  double g = 0.0;
  for (std::size_t j = 1; j <= i; ++j) g += prefix[i - j] * mixture_bin_mass(spec, s, j, h);
  return g;
}

double step_objective(const PortfolioSpec& spec, std::span<const double> prefix, const StrategyVector& s,
                      std::size_t i, double h, double premium_floor) {
  const double p = net_premium(spec, s);
  if (p < premium_floor) {
    throw SolverError(SolverError::Kind::no_admissible_strategy, "candidate premium below the floor");
  }
  const double f_prev = i == 0 ? 1.0 : prefix[i - 1];
  const double g = i == 0 ? 0.0 : convolution(spec, prefix, s, i, h);
  const double beta = aggregate_intensity(spec);
  return beta * (f_prev * (1.0 - mixture_zero_mass(spec, s)) - g) / p;
}

StepResult minimize_step(const PortfolioSpec& spec, std::span<const double> prefix, std::size_t i,
                         const SolverConfig& config) {
  if (prefix.size() < i) throw std::invalid_argument("minimize_step: prefix shorter than i");
  StepEngine engine(spec, config, i);
  return engine.minimize(i, prefix.first(i), config.inner);
}

StepResult initial_slope(const PortfolioSpec& spec, const SolverConfig& config) {
  return minimize_step(spec, {}, 0, config);
}

SolutionTable solve(const PortfolioSpec& spec, const SolverConfig& config) {
  validate(config);
  const auto start = Clock::now();
  const std::size_t n = grid_steps(config);
  const double h = config.h;
  const double beta = aggregate_intensity(spec);

  StepEngine engine(spec, config, n);

  SolutionTable t;
  t.h = h;
  t.config = config;
  for (const auto& line : spec.lines()) t.families.push_back(line.family);
  t.x.resize(n + 1);
  t.f.resize(n + 1);
  t.slope.resize(n + 1);
  t.delta.resize(n + 1);
  t.strategy.resize(n + 1);
  t.premium.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t.x[i] = static_cast<double>(i) * h;

  auto& d = t.diagnostics;
  d.premium_floor = engine.premium_floor();
  d.min_selected_premium = std::numeric_limits<double>::infinity();

  t.f[0] = 1.0;
  for (std::size_t i = 0; i <= n; ++i) {
    StepResult r = engine.minimize(i, std::span<const double>(t.f.data(), i), config.inner);
    d.dinkelbach_iterations += r.iterations;
    d.dinkelbach_fallbacks += r.fallbacks;

    const double ratio = beta * h / r.premium;
    if (!(ratio < 0.5)) {
      std::ostringstream os;
      os.precision(17);
      os << "step too large at grid index " << i << ": beta * h / p = " << ratio
         << " (selected premium " << r.premium << "); reduce h";
      throw SolverError(SolverError::Kind::step_too_large, os.str());
    }
    d.max_step_ratio = std::max(d.max_step_ratio, ratio);
    d.min_selected_premium = std::min(d.min_selected_premium, r.premium);

    if (!(r.value >= 0.0) || !std::isfinite(r.value)) violation("negative or non-finite slope", i, t.x[i]);
    const double f_prev = i == 0 ? 1.0 : t.f[i - 1];
    if (r.value > beta * f_prev / r.premium * (1.0 + 1e-12)) violation("slope above beta * f / p", i, t.x[i]);

    t.slope[i] = r.value;
    t.premium[i] = r.premium;
    t.strategy[i] = std::move(r.argmin);
    if (i == 0) continue;

    t.f[i] = t.f[i - 1] + h * t.slope[i];
    const double bound = std::exp(beta * t.x[i] / d.min_selected_premium) * (1.0 + 1e-12);
    if (!(t.f[i] <= bound)) violation("growth bound exceeded", i, t.x[i]);
  }

  const double top = t.f[n];
  for (std::size_t i = 0; i <= n; ++i) {
    t.delta[i] = t.f[i] / top;
    if (!(t.delta[i] >= 0.0 && t.delta[i] <= 1.0)) violation("delta outside [0, 1]", i, t.x[i]);
    if (i > 0 && t.delta[i] < t.delta[i - 1]) violation("delta decreasing", i, t.x[i]);
  }
  if (t.delta[n] != 1.0) violation("delta(x_max) differs from 1", n, t.x[n]);

  d.runtime_seconds = seconds_since(start);
  return t;
}

double sup_difference(const SolutionTable& coarse, const SolutionTable& fine) {
  const double q = coarse.h / fine.h;
  const auto ratio = static_cast<std::size_t>(std::llround(q));
  if (ratio == 0 || std::abs(q - static_cast<double>(ratio)) > 1e-9 * q ||
      fine.steps() != coarse.steps() * ratio) {
    throw std::invalid_argument("sup_difference: grids are not nested");
  }
  double sup = 0.0;
  for (std::size_t i = 0; i <= coarse.steps(); ++i) {
    sup = std::max(sup, std::abs(coarse.delta[i] - fine.delta[i * ratio]));
  }
  return sup;
}

std::vector<ConvergenceLevel> refine(const PortfolioSpec& spec, const SolverConfig& config, int levels) {
  if (levels < 2) throw ConfigError("refine: levels must be >= 2");
  std::vector<ConvergenceLevel> out;
  SolutionTable previous;
  for (int l = 0; l < levels; ++l) {
    SolverConfig c = config;
    c.h = std::ldexp(config.h, -l);
    SolutionTable table = solve(spec, c);
    ConvergenceLevel level;
    level.h = c.h;
    level.runtime_seconds = table.diagnostics.runtime_seconds;
    level.sup_diff = l == 0 ? std::numeric_limits<double>::quiet_NaN() : sup_difference(previous, table);
    out.push_back(level);
    previous = std::move(table);
  }
  return out;
}

double truncation_change(const PortfolioSpec& spec, const SolverConfig& config) {
  const SolutionTable base = solve(spec, config);
  SolverConfig wide = config;
  wide.x_max = 2.0 * config.x_max;
  const SolutionTable doubled = solve(spec, wide);
  double sup = 0.0;
  for (std::size_t i = 0; i <= base.steps(); ++i) sup = std::max(sup, std::abs(base.delta[i] - doubled.delta[i]));
  return sup;
}

}  // namespace optreins
