#include "optreins/distributions.hpp"

#include "optreins/detail/overloaded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace optreins {

namespace {

using detail::Overloaded;

constexpr double kInf = std::numeric_limits<double>::infinity();

// log of the Pareto survival function, -shape * log(1 + x / scale).
double pareto_log_survival(const Pareto& p, double x) { return -p.shape * std::log1p(x / p.scale); }

}  // namespace

ClaimDistribution::ClaimDistribution(Variant params) : params_(std::move(params)) {
  mean_ = std::visit(Overloaded{
                         [](const Exponential& e) { return 1.0 / e.rate; },
                         [](const Pareto& p) { return p.scale / (p.shape - 1.0); },
                         [](const Mixture& m) {
                           double acc = 0.0;
                           for (std::size_t k = 0; k < m.weights.size(); ++k) {
                             acc += m.weights[k] * m.components[k].mean();
                           }
                           return acc;
                         },
                     },
                     params_);
}

ClaimDistribution ClaimDistribution::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("exponential rate must be positive and finite");
  }
  return ClaimDistribution(Exponential{rate});
}

ClaimDistribution ClaimDistribution::pareto(double scale, double shape) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("pareto scale must be positive and finite");
  }
  if (!(shape > 1.0) || !std::isfinite(shape)) {
    throw std::invalid_argument("pareto shape must exceed 1 (finite mean required)");
  }
  return ClaimDistribution(Pareto{scale, shape});
}

ClaimDistribution ClaimDistribution::mixture(std::vector<double> weights,
                                             std::vector<ClaimDistribution> components) {
  if (weights.empty() || weights.size() != components.size()) {
    throw std::invalid_argument("mixture needs one weight per component and at least one component");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("mixture weights must be nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
  return ClaimDistribution(Mixture{std::move(weights), std::move(components)});
}

double ClaimDistribution::cdf(double x) const {
  if (!(x > 0.0)) {
    return 0.0;
  }
  if (x == kInf) {
    return 1.0;
  }
  return std::visit(Overloaded{
                        [x](const Exponential& e) { return -std::expm1(-e.rate * x); },
                        [x](const Pareto& p) { return -std::expm1(pareto_log_survival(p, x)); },
                        [x](const Mixture& m) {
                          double acc = 0.0;
                          for (std::size_t k = 0; k < m.weights.size(); ++k) {
                            acc += m.weights[k] * m.components[k].cdf(x);
                          }
                          return acc;
                        },
                    },
                    params_);
}

double ClaimDistribution::survival(double x) const {
  if (!(x > 0.0)) {
    return 1.0;
  }
  if (x == kInf) {
    return 0.0;
  }
  return std::visit(Overloaded{
                        [x](const Exponential& e) { return std::exp(-e.rate * x); },
                        [x](const Pareto& p) { return std::exp(pareto_log_survival(p, x)); },
                        [x](const Mixture& m) {
                          double acc = 0.0;
                          for (std::size_t k = 0; k < m.weights.size(); ++k) {
                            acc += m.weights[k] * m.components[k].survival(x);
                          }
                          return acc;
                        },
                    },
                    params_);
}

double ClaimDistribution::stop_loss(double a, double b) const {
  if (std::isnan(a) || std::isnan(b) || a < 0.0) {
    throw std::invalid_argument("stop_loss requires 0 <= a");
  }
  if (a > b) {
    throw std::invalid_argument("stop_loss requires a <= b");
  }
  if (a == b) {
    return 0.0;
  }
  return std::visit(Overloaded{
                        [&](const Exponential& e) {
                          const double head = survival(a) / e.rate;
                          return b == kInf ? head : head * -std::expm1(-e.rate * (b - a));
                        },
                        [&](const Pareto& p) {
                          const double k = p.shape - 1.0;
                          const double upper = b == kInf ? 0.0 : std::exp(-k * std::log1p(b / p.scale));
                          const double lower = std::exp(-k * std::log1p(a / p.scale));
                          return p.scale / k * (lower - upper);
                        },
                        [&](const Mixture& m) {
                          double acc = 0.0;
                          for (std::size_t k = 0; k < m.weights.size(); ++k) {
                            acc += m.weights[k] * m.components[k].stop_loss(a, b);
                          }
                          return acc;
                        },
                    },
                    params_);
}

double ClaimDistribution::interval_mass(double lo, double hi) const {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw std::invalid_argument("interval_mass requires lo <= hi");
  }
  if (lo == hi || hi <= 0.0) {
    return 0.0;
  }
  lo = std::max(lo, 0.0);
  // Written as S(lo) * (1 - S(hi)/S(lo)) so that narrow bins far in the tail
  // keep full relative precision and never come out negative.
  return std::visit(Overloaded{
                        [&](const Exponential& e) {
                          const double head = survival(lo);
                          return hi == kInf ? head : head * -std::expm1(-e.rate * (hi - lo));
                        },
                        [&](const Pareto& p) {
                          const double head = survival(lo);
                          if (hi == kInf) {
                            return head;
                          }
                          return head * -std::expm1(-p.shape * std::log1p((hi - lo) / (p.scale + lo)));
                        },
                        [&](const Mixture& m) {
                          double acc = 0.0;
                          for (std::size_t k = 0; k < m.weights.size(); ++k) {
                            acc += m.weights[k] * m.components[k].interval_mass(lo, hi);
                          }
                          return acc;
                        },
                    },
                    params_);
}

double ClaimDistribution::sample(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("sample requires a uniform draw in (0, 1)");
  }
  return std::visit(Overloaded{
                        [u](const Exponential& e) { return -std::log1p(-u) / e.rate; },
                        [u](const Pareto& p) { return p.scale * std::expm1(-std::log1p(-u) / p.shape); },
                        [u](const Mixture& m) {
                          double lower = 0.0;
                          std::size_t k = 0;
                          for (; k + 1 < m.weights.size(); ++k) {
                            if (u <= lower + m.weights[k]) {
                              break;
                            }
                            lower += m.weights[k];
                          }
                          double rescaled = (u - lower) / m.weights[k];
                          rescaled = std::clamp(rescaled, std::numeric_limits<double>::min(),
                                                std::nextafter(1.0, 0.0));
                          return m.components[k].sample(rescaled);
                        },
                    },
                    params_);
}

std::string ClaimDistribution::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const Exponential& e) { out << "exponential(rate=" << e.rate << ")"; },
                 [&](const Pareto& p) { out << "pareto(scale=" << p.scale << ", shape=" << p.shape << ")"; },
                 [&](const Mixture& m) {
                   out << "mixture(";
                   for (std::size_t k = 0; k < m.weights.size(); ++k) {
                     out << (k ? ", " : "") << m.weights[k] << "*" << m.components[k].describe();
                   }
                   out << ")";
                 },
             },
             params_);
  return out.str();
}

}  // namespace optreins
