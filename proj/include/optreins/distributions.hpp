#pragma once

#include <string>
#include <variant>
#include <vector>

namespace optreins {

class ClaimDistribution;

struct Exponential {
  double rate;
};

/// Lomax form: F(x) = 1 - (scale / (scale + x))^shape.
struct Pareto {
  double scale;
  double shape;
};

struct Mixture {
  std::vector<double> weights;
  std::vector<ClaimDistribution> components;
};

/// Claim-size law of one line of business.
///
/// Values are immutable once built; every member function is pure, so a
/// distribution can be shared freely between threads. All primitives are
/// closed form.
class ClaimDistribution {
 public:
  using Variant = std::variant<Exponential, Pareto, Mixture>;

  static ClaimDistribution exponential(double rate);
  static ClaimDistribution pareto(double scale, double shape);
  static ClaimDistribution mixture(std::vector<double> weights,
                                   std::vector<ClaimDistribution> components);

  const Variant& params() const noexcept { return params_; }

  double cdf(double x) const;
  double survival(double x) const;
  double mean() const noexcept { return mean_; }

  /// Integral of the survival function over [a, b]; b may be +inf.
  double stop_loss(double a, double b) const;

  /// P(lo < U <= hi). hi may be +inf.
  double interval_mass(double lo, double hi) const;

  /// Deterministic draw from a uniform u in (0, 1). Exponential and Pareto
  /// invert the CDF; mixtures use composition on the same uniform (the
  /// first stretch of u picks the component, its rescaled remainder is
  /// inverted by that component).
  double sample(double u) const;

  std::string describe() const;

 private:
  explicit ClaimDistribution(Variant params);

  Variant params_;
  double mean_ = 0.0;
};

}  // namespace optreins
