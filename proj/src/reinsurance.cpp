#include "optreins/reinsurance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "optreins/detail/overloaded.hpp"

namespace optreins {

namespace {

using detail::Overloaded;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

RetainedLoss make_proportional(double b) {
  if (!(b >= 0.0 && b <= 1.0)) {
    throw std::invalid_argument("proportional retained share must lie in [0, 1]");
  }
  return Proportional{b};
}

RetainedLoss make_xl(double retention) {
  if (!(retention >= 0.0)) {
    throw std::invalid_argument("XL retention must be >= 0");
  }
  return ExcessOfLoss{retention};
}

RetainedLoss make_lxl(double retention, double limit) {
  if (!(retention >= 0.0) || !(limit >= 0.0)) {
    throw std::invalid_argument("LXL retention and limit must be >= 0");
  }
  return LimitedExcessOfLoss{retention, limit};
}

Family family_from_string(const std::string& name) {
  if (name == "proportional") return Family::proportional;
  if (name == "xl") return Family::xl;
  if (name == "lxl") return Family::lxl;
  if (name == "none") return Family::none;
  throw std::invalid_argument("unknown reinsurance family '" + name + "' (expected proportional | xl | lxl | none)");
}

std::string to_string(Family family) {
  switch (family) {
    case Family::proportional: return "proportional";
    case Family::xl: return "xl";
    case Family::lxl: return "lxl";
    case Family::none: return "none";
  }
  return "none";
}

bool belongs_to(const RetainedLoss& r, Family family) {
  return std::visit(Overloaded{
                        [&](const Proportional&) { return family == Family::proportional; },
                        [&](const ExcessOfLoss&) { return family == Family::xl; },
                        [&](const LimitedExcessOfLoss&) { return family == Family::lxl; },
                        [](const FullRetention&) { return true; },
                    },
                    r);
}

double apply(const RetainedLoss& r, double claim) {
  return std::visit(Overloaded{
                        [claim](const Proportional& p) { return p.retained_share * claim; },
                        [claim](const ExcessOfLoss& x) { return std::min(claim, x.retention); },
                        [claim](const LimitedExcessOfLoss& x) {
                          const double excess = claim - x.retention - x.limit;
                          return std::min(claim, x.retention) + (excess > 0.0 ? excess : 0.0);
                        },
                        [claim](const FullRetention&) { return claim; },
                    },
                    r);
}

double ceded_mean(const RetainedLoss& r, const ClaimDistribution& dist) {
  return std::visit(Overloaded{
                        [&](const Proportional& p) { return (1.0 - p.retained_share) * dist.mean(); },
                        [&](const ExcessOfLoss& x) { return dist.stop_loss(x.retention, kInf); },
                        [&](const LimitedExcessOfLoss& x) {
                          return dist.stop_loss(x.retention, x.retention + x.limit);
                        },
                        [](const FullRetention&) { return 0.0; },
                    },
                    r);
}

double claim_threshold(const RetainedLoss& r, double x) {
  if (x < 0.0) {
    return x;
  }
  return std::visit(Overloaded{
                        [x](const Proportional& p) { return p.retained_share > 0.0 ? x / p.retained_share : kInf; },
                        [x](const ExcessOfLoss& e) { return x < e.retention ? x : kInf; },
                        [x](const LimitedExcessOfLoss& e) { return x < e.retention ? x : x + e.limit; },
                        [x](const FullRetention&) { return x; },
                    },
                    r);
}

double retained_interval_mass(const RetainedLoss& r, const ClaimDistribution& dist, double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw std::invalid_argument("retained_interval_mass requires lo <= hi");
  }
  if (lo == hi) {
    return 0.0;
  }
  const double a = claim_threshold(r, lo);
  const double b = claim_threshold(r, hi);
  return a == b ? 0.0 : dist.interval_mass(a, b);
}

double retained_survival(const RetainedLoss& r, const ClaimDistribution& dist, double x) {
  return dist.survival(claim_threshold(r, x));
}

double retained_zero_mass(const RetainedLoss& r, const ClaimDistribution& dist) {
  return dist.cdf(claim_threshold(r, 0.0));
}

std::vector<RetainedLoss> parameter_candidates(Family family, int resolution, double cap) {
  if (resolution < 2) {
    throw std::invalid_argument("candidate resolution must be >= 2");
  }
  if (!(cap > 0.0) || !std::isfinite(cap)) {
    throw std::invalid_argument("candidate cap must be positive and finite");
  }
  const double last = static_cast<double>(resolution - 1);
  auto grid = [&](int k, double top) { return top * static_cast<double>(k) / last; };

  std::vector<RetainedLoss> out;
  switch (family) {
    case Family::proportional:
      for (int k = 0; k < resolution; ++k) out.push_back(Proportional{grid(k, 1.0)});
      break;
    case Family::xl:
      for (int k = 0; k < resolution; ++k) out.push_back(ExcessOfLoss{grid(k, cap)});
      out.push_back(ExcessOfLoss{kInf});
      break;
    case Family::lxl:
      // L = 0 gives back the identity, which is already the last entry.
      for (int m = 0; m < resolution; ++m) {
        for (int l = 1; l < resolution; ++l) out.push_back(LimitedExcessOfLoss{grid(m, cap), grid(l, cap)});
        out.push_back(LimitedExcessOfLoss{grid(m, cap), kInf});
      }
      out.push_back(FullRetention{});
      break;
    case Family::none:
      out.push_back(FullRetention{});
      break;
  }
  return out;
}

std::vector<RetainedLoss> aligned_xl_candidates(double step, std::size_t count) {
  std::vector<RetainedLoss> out;
  out.reserve(count + 2);
  for (std::size_t k = 0; k <= count; ++k) out.push_back(ExcessOfLoss{static_cast<double>(k) * step});
  out.push_back(ExcessOfLoss{kInf});
  return out;
}

std::vector<std::string> parameter_names(Family family, std::size_t line_number) {
  const std::string n = std::to_string(line_number);
  switch (family) {
    case Family::proportional: return {"b" + n};
    case Family::xl: return {"M" + n};
    case Family::lxl: return {"M" + n, "L" + n};
    case Family::none: return {};
  }
  return {};
}

std::vector<double> parameter_values(const RetainedLoss& r, Family family) {
  if (!belongs_to(r, family)) {
    throw std::invalid_argument("strategy " + describe(r) + " is not in family " + to_string(family));
  }
  switch (family) {
    case Family::proportional:
      return {std::holds_alternative<Proportional>(r) ? std::get<Proportional>(r).retained_share : 1.0};
    case Family::xl:
      return {std::holds_alternative<ExcessOfLoss>(r) ? std::get<ExcessOfLoss>(r).retention : kInf};
    case Family::lxl:
      if (const auto* x = std::get_if<LimitedExcessOfLoss>(&r)) return {x->retention, x->limit};
      return {kInf, kInf};
    case Family::none:
      return {};
  }
  return {};
}

RetainedLoss from_parameter_values(Family family, std::span<const double> values) {
  if (values.size() != parameter_names(family, 1).size()) {
    throw std::invalid_argument("wrong number of parameters for family " + to_string(family));
  }
  switch (family) {
    case Family::proportional: return make_proportional(values[0]);
    case Family::xl: return make_xl(values[0]);
    case Family::lxl:
      if (values[0] == kInf) {
        if (!(values[1] >= 0.0)) throw std::invalid_argument("LXL limit must be >= 0");
        return FullRetention{};
      }
      return make_lxl(values[0], values[1]);
    case Family::none: return FullRetention{};
  }
  return FullRetention{};
}

std::string describe(const RetainedLoss& r) {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const Proportional& p) { out << "proportional(b=" << p.retained_share << ")"; },
                 [&](const ExcessOfLoss& x) { out << "xl(M=" << x.retention << ")"; },
                 [&](const LimitedExcessOfLoss& x) { out << "lxl(M=" << x.retention << ", L=" << x.limit << ")"; },
                 [&](const FullRetention&) { out << "full"; },
             },
             r);
  return out.str();
}

}  // namespace optreins
