#include "optreins/portfolio.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace optreins {

PortfolioSpec::PortfolioSpec(std::vector<LineSpec> lines, double eta, double eta1)
    : lines_(std::move(lines)), eta_(eta), eta1_(eta1) {
  if (lines_.empty()) {
    throw std::invalid_argument("lines: at least one line is required");
  }
  for (std::size_t k = 0; k < lines_.size(); ++k) {
    const double beta = lines_[k].intensity;
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      throw std::invalid_argument("lines[" + std::to_string(k) + "].intensity: must be positive and finite");
    }
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("eta: must be positive");
  }
  if (!(eta1 >= eta) || !std::isfinite(eta1)) {
    throw std::invalid_argument("eta1: must satisfy eta1 >= eta");
  }
}

double aggregate_intensity(const PortfolioSpec& spec) {
  double beta = 0.0;
  for (const auto& line : spec.lines()) beta += line.intensity;
  return beta;
}

double gross_premium(const PortfolioSpec& spec) {
  double p = 0.0;
  for (const auto& line : spec.lines()) p += (1.0 + spec.eta()) * line.intensity * line.dist.mean();
  return p;
}

double ceded_premium(const PortfolioSpec& spec, std::size_t line, const RetainedLoss& r) {
  const auto& l = spec.lines().at(line);
  return (1.0 + spec.eta1()) * l.intensity * ceded_mean(r, l.dist);
}

double net_premium(const PortfolioSpec& spec, const StrategyVector& s) {
  if (s.size() != spec.size()) {
    throw std::invalid_argument("strategy vector length does not match the number of lines");
  }
  double ceded = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) ceded += ceded_premium(spec, k, s[k]);
  return gross_premium(spec) - ceded;
}

double mixture_bin_mass(const PortfolioSpec& spec, const StrategyVector& s, std::size_t j, double h) {
  if (j == 0 || !(h > 0.0)) {
    throw std::invalid_argument("mixture_bin_mass requires j >= 1 and h > 0");
  }
  const double beta = aggregate_intensity(spec);
  const double lo = static_cast<double>(j - 1) * h;
  const double hi = static_cast<double>(j) * h;
  double mass = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const auto& line = spec.lines()[k];
    mass += line.intensity / beta * retained_interval_mass(s.at(k), line.dist, lo, hi);
  }
  return mass;
}

double mixture_zero_mass(const PortfolioSpec& spec, const StrategyVector& s) {
  const double beta = aggregate_intensity(spec);
  double mass = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const auto& line = spec.lines()[k];
    mass += line.intensity / beta * retained_zero_mass(s.at(k), line.dist);
  }
  return mass;
}

bool admissible(const PortfolioSpec& spec, const StrategyVector& s, double floor) {
  return net_premium(spec, s) >= floor;
}

double default_premium_floor(const PortfolioSpec& spec) { return 1e-6 * gross_premium(spec); }

StrategyVector full_retention_vector(const PortfolioSpec& spec) {
  return StrategyVector(spec.size(), FullRetention{});
}

PortfolioSpec single_contract(const PortfolioSpec& spec, Family family) {
  if (spec.size() == 1) {
    auto line = spec.lines().front();
    line.family = family;
    return PortfolioSpec({line}, spec.eta(), spec.eta1());
  }
  const double beta = aggregate_intensity(spec);
  std::vector<double> weights;
  std::vector<ClaimDistribution> components;
  for (const auto& line : spec.lines()) {
    weights.push_back(line.intensity / beta);
    components.push_back(line.dist);
  }
  LineSpec merged{ClaimDistribution::mixture(std::move(weights), std::move(components)), beta, family};
  return PortfolioSpec({merged}, spec.eta(), spec.eta1());
}

}  // namespace optreins
