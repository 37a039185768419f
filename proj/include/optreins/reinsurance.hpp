#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "optreins/distributions.hpp"

namespace optreins {

/// R(a) = b * a.
struct Proportional {
  double retained_share;
  bool operator==(const Proportional&) const = default;
};

/// R(a) = min(a, M). M = +inf is full retention.
struct ExcessOfLoss {
  double retention;
  bool operator==(const ExcessOfLoss&) const = default;
};

/// R(a) = min(a, M) + (a - M - L)^+; the reinsurer pays at most L per claim.
struct LimitedExcessOfLoss {
  double retention;
  double limit;
  bool operator==(const LimitedExcessOfLoss&) const = default;
};

struct FullRetention {
  bool operator==(const FullRetention&) const = default;
};

using RetainedLoss = std::variant<Proportional, ExcessOfLoss, LimitedExcessOfLoss, FullRetention>;

/// The contract family allowed on a line.
enum class Family { proportional, xl, lxl, none };

RetainedLoss make_proportional(double b);
RetainedLoss make_xl(double retention);
RetainedLoss make_lxl(double retention, double limit);

Family family_from_string(const std::string& name);
std::string to_string(Family family);

/// True when r is a member of the family. Full retention belongs to every family.
bool belongs_to(const RetainedLoss& r, Family family);

/// Retained part of a claim, in [0, claim].
double apply(const RetainedLoss& r, double claim);

/// E(U - R(U)).
double ceded_mean(const RetainedLoss& r, const ClaimDistribution& dist);

/// Threshold t(x) on the claim size with P(R(U) <= x) = F(t(x)), for x >= 0.
/// Every family's retained law is a monotone relabelling of F this way,
/// including its atoms.
double claim_threshold(const RetainedLoss& r, double x);

/// P(lo < R(U) <= hi), atoms included on the closed right edge.
double retained_interval_mass(const RetainedLoss& r, const ClaimDistribution& dist, double lo, double hi);

/// P(R(U) > x).
double retained_survival(const RetainedLoss& r, const ClaimDistribution& dist, double x);

/// P(R(U) = 0).
double retained_zero_mass(const RetainedLoss& r, const ClaimDistribution& dist);

/// Discretized control set of a family. Parameters ascend; full retention is
/// always the last element.
std::vector<RetainedLoss> parameter_candidates(Family family, int resolution, double cap);

/// XL retentions on the solver grid, {0, step, 2*step, ..., count*step, inf}.
std::vector<RetainedLoss> aligned_xl_candidates(double step, std::size_t count);

/// CSV column names for a line, e.g. {"b2"} or {"M3", "L3"}; empty for Family::none.
std::vector<std::string> parameter_names(Family family, std::size_t line_number);

/// Parameter values in the order of parameter_names. Full retention maps to
/// b = 1 or M = inf (and L = inf).
std::vector<double> parameter_values(const RetainedLoss& r, Family family);

RetainedLoss from_parameter_values(Family family, std::span<const double> values);

std::string describe(const RetainedLoss& r);

}  // namespace optreins
