#pragma once

#include <cstddef>
#include <cstdint>

#include "optreins/portfolio.hpp"
#include "optreins/strategy_table.hpp"

namespace optreins {

struct SimConfig {
  std::size_t n_paths = 100000;
  /// Absorbing level declared as survival; must exceed the initial surplus.
  double upper_barrier = 0.0;
  /// Paths still alive after this much model time are censored.
  double max_time = 1.0e4;
  std::uint64_t seed = 20240601;
  /// Threads used for path simulation; 0 picks the hardware concurrency.
  /// Results never depend on this value.
  unsigned workers = 0;
};

enum class Verdict { ruined, survived, censored };

struct PathOutcome {
  Verdict verdict = Verdict::censored;
  double terminal_time = 0.0;
  double terminal_surplus = 0.0;
};

/// Counter-based uniform stream: draw n of path p under seed s is a pure
/// function of (s, p, n), so every path owns an independent substream.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path) noexcept;

  /// Uniform in the open interval (0, 1).
  double uniform() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Drift schedule of a strategy table: maps surplus to the cumulative time
/// needed to drift there from 0 when no claim occurs.
class DriftClock {
 public:
  explicit DriftClock(const StrategyTable& table);

  double time_at(double surplus) const;
  double surplus_at(double time) const;

 private:
  const StrategyTable* table_;
  std::vector<double> start_time_;  // start_time_[c] = time to reach breakpoints[c]
};

PathOutcome simulate_path(const PortfolioSpec& spec, const StrategyTable& table, double x0,
                          const SimConfig& config, PathStream& stream);

struct SurvivalEstimate {
  double x0 = 0.0;
  double estimate = 0.0;
  double half_width = 0.0;  // 99% normal approximation
  double censored_fraction = 0.0;
  std::size_t survived = 0;
  std::size_t ruined = 0;
  std::size_t censored = 0;
};

/// Fraction of surviving paths among the uncensored ones. Path p uses
/// PathStream(config.seed, p) for every x0, so estimates at different x0
/// share common random numbers. Throws SimulationError when 1% or more of
/// the paths are censored and ConfigError on x0 outside [0, barrier].
SurvivalEstimate estimate_survival(const PortfolioSpec& spec, const StrategyTable& table, double x0,
                                   const SimConfig& config);

/// 1 - exp(-(eta * rate / (1 + eta)) * x) / (1 + eta): single exponential
/// line without reinsurance.
double closed_form_survival_exponential(double eta, double rate, double x);

}  // namespace optreins
