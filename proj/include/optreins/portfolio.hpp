#pragma once

#include <cstddef>
#include <vector>

#include "optreins/distributions.hpp"
#include "optreins/reinsurance.hpp"

namespace optreins {

struct LineSpec {
  ClaimDistribution dist;
  double intensity;  // Poisson claim rate of the line
  Family family;
};

/// One entry per line, in declaration order.
using StrategyVector = std::vector<RetainedLoss>;

/// Multi-line Cramer-Lundberg portfolio with expected-value premiums.
///
/// Construction validates every invariant (nonempty lines, positive
/// intensities, eta1 >= eta > 0) and throws std::invalid_argument with a
/// field path such as "lines[2].intensity" on violation.
class PortfolioSpec {
 public:
  PortfolioSpec(std::vector<LineSpec> lines, double eta, double eta1);

  const std::vector<LineSpec>& lines() const noexcept { return lines_; }
  std::size_t size() const noexcept { return lines_.size(); }
  double eta() const noexcept { return eta_; }
  double eta1() const noexcept { return eta1_; }

 private:
  std::vector<LineSpec> lines_;
  double eta_;
  double eta1_;
};

double aggregate_intensity(const PortfolioSpec& spec);

/// Sum over lines of (1 + eta) * intensity * mean claim.
double gross_premium(const PortfolioSpec& spec);

/// (1 + eta1) * intensity_k * E(U_k - R_k(U_k)) for one line.
double ceded_premium(const PortfolioSpec& spec, std::size_t line, const RetainedLoss& r);

/// Gross premium minus the reinsurance premium of every line. May be negative.
double net_premium(const PortfolioSpec& spec, const StrategyVector& s);

/// P((j-1)h < Z <= jh) for the aggregate retained claim Z.
double mixture_bin_mass(const PortfolioSpec& spec, const StrategyVector& s, std::size_t j, double h);

double mixture_zero_mass(const PortfolioSpec& spec, const StrategyVector& s);

/// net_premium(spec, s) >= floor (inclusive).
bool admissible(const PortfolioSpec& spec, const StrategyVector& s, double floor);

/// 1e-6 of the gross premium.
double default_premium_floor(const PortfolioSpec& spec);

StrategyVector full_retention_vector(const PortfolioSpec& spec);

/// Collapse all lines into one synthetic line whose claim law is the
/// intensity-weighted mixture, with the given family. A single-line
/// portfolio is returned unchanged apart from the family.
PortfolioSpec single_contract(const PortfolioSpec& spec, Family family);

}  // namespace optreins
