#include "optreins/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "optreins/errors.hpp"

namespace optreins {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double kZ99 = 2.5758293035489004;

struct Context {
  const PortfolioSpec& spec;
  const StrategyTable& table;
  const DriftClock& clock;
  std::vector<double> cumulative;  // running sums of line intensities
  double beta;
  double barrier;
  double barrier_time;
};

Context make_context(const PortfolioSpec& spec, const StrategyTable& table, const DriftClock& clock,
                     const SimConfig& config) {
  Context ctx{spec, table, clock, {}, aggregate_intensity(spec), config.upper_barrier,
              clock.time_at(config.upper_barrier)};
  double run = 0.0;
  for (const auto& line : spec.lines()) ctx.cumulative.push_back(run += line.intensity);
  return ctx;
}

PathOutcome run_path(const Context& ctx, double x0, double max_time, PathStream& stream) {
  PathOutcome out;
  double x = x0;
  double t = 0.0;
  if (x >= ctx.barrier) {
    out.verdict = Verdict::survived;
    out.terminal_surplus = x;
    return out;
  }
  while (true) {
    const double wait = -std::log(stream.uniform()) / ctx.beta;
    const double clock_now = ctx.clock.time_at(x);
    const double to_barrier = ctx.barrier_time - clock_now;
    if (wait >= to_barrier) {
      t += to_barrier;
      if (t > max_time) break;
      out.verdict = Verdict::survived;
      out.terminal_time = t;
      out.terminal_surplus = ctx.barrier;
      return out;
    }
    t += wait;
    if (t > max_time) break;
    x = ctx.clock.surplus_at(clock_now + wait);

    const double pick = stream.uniform() * ctx.beta;
    const auto k = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(ctx.cumulative.begin(), ctx.cumulative.end(), pick) -
                                 ctx.cumulative.begin()),
        ctx.cumulative.size() - 1);
    const double claim = ctx.spec.lines()[k].dist.sample(stream.uniform());
    x -= apply(ctx.table.lookup(x)[k], claim);
    if (x < 0.0) {
      out.verdict = Verdict::ruined;
      out.terminal_time = t;
      out.terminal_surplus = x;
      return out;
    }
  }
  out.verdict = Verdict::censored;
  out.terminal_time = max_time;
  out.terminal_surplus = x;
  return out;
}

void check_config(const StrategyTable& table, double x0, const SimConfig& config) {
  check(table);
  if (config.n_paths < 1) throw ConfigError("simulation.paths: must be >= 1");
  if (!(config.upper_barrier > 0.0) || !std::isfinite(config.upper_barrier)) {
    throw ConfigError("simulation.barrier: must be positive and finite");
  }
  if (!(config.max_time > 0.0)) throw ConfigError("simulation.max_time: must be positive");
  if (!(x0 >= 0.0)) throw ConfigError("simulation.x0: must be nonnegative");
  if (x0 > config.upper_barrier) throw ConfigError("simulation.x0: exceeds the upper barrier");
  for (double p : table.premiums) {
    if (!(p > 0.0)) throw SimulationError("strategy table contains a cell with nonpositive net premium");
  }
}

}  // namespace

PathStream::PathStream(std::uint64_t seed, std::uint64_t path) noexcept
    : key_(mix(mix(seed) ^ (path * kGolden + 0x632be59bd9b4e019ULL))) {}

double PathStream::uniform() noexcept {
  const std::uint64_t z = mix(key_ + (++counter_) * kGolden);
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

DriftClock::DriftClock(const StrategyTable& table) : table_(&table) {
  const auto& b = table.breakpoints;
  start_time_.resize(b.size());
  start_time_[0] = 0.0;
  for (std::size_t c = 1; c < b.size(); ++c) {
    start_time_[c] = start_time_[c - 1] + (b[c] - b[c - 1]) / table.premiums[c - 1];
  }
}

double DriftClock::time_at(double surplus) const {
  const std::size_t c = table_->cell(surplus);
  return start_time_[c] + (surplus - table_->breakpoints[c]) / table_->premiums[c];
}

double DriftClock::surplus_at(double time) const {
  const auto it = std::upper_bound(start_time_.begin(), start_time_.end(), time);
  const auto c = static_cast<std::size_t>(it - start_time_.begin()) - 1;
  return table_->breakpoints[c] + (time - start_time_[c]) * table_->premiums[c];
}

PathOutcome simulate_path(const PortfolioSpec& spec, const StrategyTable& table, double x0,
                          const SimConfig& config, PathStream& stream) {
  check_config(table, x0, config);
  const DriftClock clock(table);
  const Context ctx = make_context(spec, table, clock, config);
  return run_path(ctx, x0, config.max_time, stream);
}

SurvivalEstimate estimate_survival(const PortfolioSpec& spec, const StrategyTable& table, double x0,
                                   const SimConfig& config) {
  check_config(table, x0, config);
  const DriftClock clock(table);
  const Context ctx = make_context(spec, table, clock, config);

  unsigned workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.n_paths));

  struct Counts {
    std::size_t survived = 0, ruined = 0, censored = 0;
  };
  std::vector<Counts> counts(workers);
  auto work = [&](unsigned w) {
    const std::size_t begin = config.n_paths * w / workers;
    const std::size_t end = config.n_paths * (w + 1) / workers;
    Counts& c = counts[w];
    for (std::size_t p = begin; p < end; ++p) {
      PathStream stream(config.seed, p);
      switch (run_path(ctx, x0, config.max_time, stream).verdict) {
        case Verdict::survived: ++c.survived; break;
        case Verdict::ruined: ++c.ruined; break;
        case Verdict::censored: ++c.censored; break;
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& th : threads) th.join();
  }

  SurvivalEstimate e;
  e.x0 = x0;
  for (const auto& c : counts) {
    e.survived += c.survived;
    e.ruined += c.ruined;
    e.censored += c.censored;
  }
  e.censored_fraction = static_cast<double>(e.censored) / static_cast<double>(config.n_paths);
  if (e.censored_fraction >= 0.01) {
    throw SimulationError("censored fraction " + std::to_string(e.censored_fraction) +
                          " >= 1%; raise max_time or lower the barrier");
  }
  const double n = static_cast<double>(e.survived + e.ruined);
  e.estimate = static_cast<double>(e.survived) / n;
  e.half_width = kZ99 * std::sqrt(e.estimate * (1.0 - e.estimate) / n);
  return e;
}

double closed_form_survival_exponential(double eta, double rate, double x) {
  return 1.0 - std::exp(-(eta * rate / (1.0 + eta)) * x) / (1.0 + eta);
}

}  // namespace optreins
