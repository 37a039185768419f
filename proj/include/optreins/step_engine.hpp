#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "optreins/portfolio.hpp"
#include "optreins/solver_config.hpp"

namespace optreins {

struct StepResult {
  double value = 0.0;       // minimal slope f'_h at this grid point
  StrategyVector argmin;
  double premium = 0.0;     // net premium of argmin
  std::size_t iterations = 0;
  std::size_t fallbacks = 0;
};

/// Precomputed candidate tables for one (portfolio, grid) pair and the
/// inner minimization of one step of the recursion.
///
/// For a candidate vector theta the slope candidate is N(theta) / D(theta)
/// with
///   N = sum_k beta_k * a_k(theta_k),
///   a_k = sum_{j<=i} (f_{i-1} - f_{i-j}) P((j-1)h < R_k <= jh) + f_{i-1} P(R_k > ih),
///   D = gross premium - sum_k cost_k(theta_k).
/// This equals beta * (f_{i-1} (1 - P(Z = 0)) - G(ih)) term by term, but every
/// summand is nonnegative, so slopes never pick up a negative sign from
/// cancellation. Both numerator and denominator are separable over lines.
class StepEngine {
 public:
  StepEngine(const PortfolioSpec& spec, const SolverConfig& config, std::size_t steps);

  /// Minimizes over candidate vectors at grid index i. prefix holds
  /// f(0), ..., f((i-1)h); at i = 0 it is empty and f(-h) is taken as 1,
  /// which reproduces the initial-slope formula.
  StepResult minimize(std::size_t i, std::span<const double> prefix, InnerMethod method);

  double premium_floor() const noexcept { return floor_; }
  double gross() const noexcept { return gross_; }
  std::size_t steps() const noexcept { return steps_; }

  /// Candidate list of a line, in tie-break order.
  const std::vector<RetainedLoss>& options(std::size_t line) const { return lines_.at(line).options; }

 private:
  static constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();

  struct LineTable {
    double intensity = 0.0;
    std::vector<RetainedLoss> options;
    std::vector<double> cost;
    /// First grid index at which the option's retained law differs from full
    /// retention; before that it costs more and changes nothing.
    std::vector<std::size_t> deviation;
    bool aligned_xl = false;
    std::vector<std::vector<double>> masses;  // masses[c][j - 1]
    std::vector<std::vector<double>> tails;   // tails[c][i]
    std::vector<double> base_mass;            // full retention, aligned XL only
    std::vector<double> base_tail;
  };

  void build_line(std::size_t k, const LineSpec& line);
  void line_values(std::size_t k, std::size_t i, double f_prev, std::vector<double>& out) const;
  bool active(std::size_t k, std::size_t c, std::size_t i) const;

  StepResult exhaustive(std::size_t i);
  StepResult fractional(std::size_t i, double f_prev);
  StepResult shared(std::size_t i);
  std::vector<std::size_t> constrained_inner(double lambda, const std::vector<std::size_t>& incumbent);
  StepResult finish(const std::vector<std::size_t>& choice) const;
  double numerator(const std::vector<std::size_t>& choice) const;
  double ceded(const std::vector<std::size_t>& choice) const;

  PortfolioSpec spec_;
  SolverConfig config_;
  std::size_t steps_;
  double h_;
  double gross_;
  double floor_;
  std::vector<LineTable> lines_;

  // per-step scratch
  std::vector<double> gaps_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<std::size_t>> active_;
};

}  // namespace optreins
