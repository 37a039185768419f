#include "optreins/step_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "optreins/errors.hpp"

namespace optreins {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  for (; j < n; ++j) s0 += a[j] * b[j];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

StepEngine::StepEngine(const PortfolioSpec& spec, const SolverConfig& config, std::size_t steps)
    : spec_(spec),
      config_(config),
      steps_(steps),
      h_(config.h),
      gross_(gross_premium(spec)),
      floor_(config.premium_floor > 0.0 ? config.premium_floor : default_premium_floor(spec)) {
  if (config_.candidate_cap <= 0.0) {
    config_.candidate_cap = config_.x_max;
  }
  if (config_.shared_contract) {
    for (const auto& line : spec_.lines()) {
      if (line.family != spec_.lines().front().family) {
        throw ConfigError("shared_contract requires every line to declare the same family");
      }
    }
  }
  lines_.resize(spec_.size());
  for (std::size_t k = 0; k < spec_.size(); ++k) build_line(k, spec_.lines()[k]);
  values_.resize(spec_.size());
  active_.resize(spec_.size());
  gaps_.reserve(steps_);
}

void StepEngine::build_line(std::size_t k, const LineSpec& line) {
  LineTable& t = lines_[k];
  t.intensity = line.intensity;
  const auto& res = config_.resolution;
  switch (line.family) {
    case Family::proportional:
      t.options = parameter_candidates(Family::proportional, res.proportional, 1.0);
      break;
    case Family::xl:
      if (res.xl == 0) {
        t.aligned_xl = true;
        t.options = aligned_xl_candidates(h_, steps_);
      } else {
        t.options = parameter_candidates(Family::xl, res.xl, config_.candidate_cap);
      }
      break;
    case Family::lxl:
      t.options = parameter_candidates(Family::lxl, res.lxl, config_.candidate_cap);
      break;
    case Family::none:
      t.options = {FullRetention{}};
      break;
  }

  const std::size_t count = t.options.size();
  t.cost.resize(count);
  for (std::size_t c = 0; c < count; ++c) t.cost[c] = ceded_premium(spec_, k, t.options[c]);
  t.deviation.assign(count, kNever);

  if (t.aligned_xl) {
    t.base_mass.resize(steps_);
    t.base_tail.resize(steps_ + 1);
    for (std::size_t j = 1; j <= steps_; ++j) {
      t.base_mass[j - 1] =
          line.dist.interval_mass(static_cast<double>(j - 1) * h_, static_cast<double>(j) * h_);
    }
    for (std::size_t i = 0; i <= steps_; ++i) t.base_tail[i] = line.dist.survival(static_cast<double>(i) * h_);
    for (std::size_t c = 0; c + 1 < count; ++c) t.deviation[c] = c;
    return;
  }

  t.masses.resize(count);
  t.tails.resize(count);
  for (std::size_t c = 0; c < count; ++c) {
    auto& m = t.masses[c];
    m.resize(steps_);
    for (std::size_t j = 1; j <= steps_; ++j) {
      m[j - 1] = retained_interval_mass(t.options[c], line.dist, static_cast<double>(j - 1) * h_,
                                        static_cast<double>(j) * h_);
    }
    while (!m.empty() && m.back() == 0.0) m.pop_back();
    auto& tail = t.tails[c];
    tail.resize(steps_ + 1);
    for (std::size_t i = 0; i <= steps_; ++i) {
      tail[i] = retained_survival(t.options[c], line.dist, static_cast<double>(i) * h_);
    }
  }

  // Full retention is always the last option.
  const std::size_t full = count - 1;
  const auto mass_at = [&](std::size_t c, std::size_t j) {
    return j - 1 < t.masses[c].size() ? t.masses[c][j - 1] : 0.0;
  };
  for (std::size_t c = 0; c < full; ++c) {
    for (std::size_t i = 0; i <= steps_; ++i) {
      if (t.tails[c][i] != t.tails[full][i] || (i >= 1 && mass_at(c, i) != mass_at(full, i))) {
        t.deviation[c] = i;
        break;
      }
    }
  }
}

void StepEngine::line_values(std::size_t k, std::size_t i, double f_prev, std::vector<double>& out) const {
  const LineTable& t = lines_[k];
  const std::size_t count = t.options.size();
  out.assign(count, 0.0);
  if (t.aligned_xl) {
    // Retention M = c*h keeps full-retention bins below c and lumps
    // P(U > (c-1)h) into bin c, so all values follow from one running sum.
    // Options c > i behave like full retention at this step.
    double running = 0.0;
    for (std::size_t c = 1; c <= i; ++c) {
      out[c] = running + gaps_[c - 1] * t.base_tail[c - 1];
      running += gaps_[c - 1] * t.base_mass[c - 1];
    }
    const double full = running + f_prev * t.base_tail[i];
    for (std::size_t c = i + 1; c < count; ++c) out[c] = full;
    return;
  }
  // Options that match full retention up to this step share its value.
  const std::size_t full = count - 1;
  auto eval = [&](std::size_t c) {
    const auto& m = t.masses[c];
    return dot(gaps_.data(), m.data(), std::min(i, m.size())) + f_prev * t.tails[c][i];
  };
  out[full] = eval(full);
  for (std::size_t c = 0; c < full; ++c) {
    if (gross_ - t.cost[c] < floor_) continue;
    out[c] = i < t.deviation[c] ? out[full] : eval(c);
  }
}

bool StepEngine::active(std::size_t k, std::size_t c, std::size_t i) const {
  const LineTable& t = lines_[k];
  if (gross_ - t.cost[c] < floor_) return false;
  return !(i < t.deviation[c] && t.cost[c] > 0.0);
}

double StepEngine::numerator(const std::vector<std::size_t>& choice) const {
  double n = 0.0;
  for (std::size_t k = 0; k < choice.size(); ++k) n += lines_[k].intensity * values_[k][choice[k]];
  return n;
}

double StepEngine::ceded(const std::vector<std::size_t>& choice) const {
  double c = 0.0;
  for (std::size_t k = 0; k < choice.size(); ++k) c += lines_[k].cost[choice[k]];
  return c;
}

StepResult StepEngine::finish(const std::vector<std::size_t>& choice) const {
  StepResult r;
  r.premium = gross_ - ceded(choice);
  r.value = numerator(choice) / r.premium;
  r.argmin.reserve(choice.size());
  for (std::size_t k = 0; k < choice.size(); ++k) r.argmin.push_back(lines_[k].options[choice[k]]);
  return r;
}

StepResult StepEngine::minimize(std::size_t i, std::span<const double> prefix, InnerMethod method) {
  if (prefix.size() != i) {
    throw std::invalid_argument("step " + std::to_string(i) + " needs exactly " + std::to_string(i) +
                                " prefix values");
  }
  if (i > steps_) {
    throw std::invalid_argument("step index beyond the precomputed grid");
  }
  if (gross_ < floor_) {
    throw SolverError(SolverError::Kind::no_admissible_strategy,
                      "gross premium is below the premium floor; no admissible strategy");
  }
  const double f_prev = i == 0 ? 1.0 : prefix[i - 1];
  gaps_.resize(i);
  for (std::size_t j = 1; j <= i; ++j) gaps_[j - 1] = f_prev - prefix[i - j];

  for (std::size_t k = 0; k < lines_.size(); ++k) {
    line_values(k, i, f_prev, values_[k]);
    active_[k].clear();
    for (std::size_t c = 0; c < lines_[k].options.size(); ++c) {
      if (active(k, c, i)) active_[k].push_back(c);
    }
  }

  if (config_.shared_contract) return shared(i);
  return method == InnerMethod::exhaustive ? exhaustive(i) : fractional(i, f_prev);
}

StepResult StepEngine::exhaustive(std::size_t i) {
  const std::size_t n = lines_.size();
  std::vector<std::size_t> pos(n, 0), choice(n), best;
  double best_ratio = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t k = 0; k < n; ++k) choice[k] = active_[k][pos[k]];
    const double d = gross_ - ceded(choice);
    if (d >= floor_) {
      const double ratio = numerator(choice) / d;
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best = choice;
      }
    }
    // Odometer with the first line most significant.
    bool done = true;
    for (std::size_t k = n; k-- > 0;) {
      if (++pos[k] < active_[k].size()) {
        done = false;
        break;
      }
      pos[k] = 0;
    }
    if (done) break;
  }
  if (best.empty()) {
    throw SolverError(SolverError::Kind::no_admissible_strategy,
                      "no admissible strategy at grid index " + std::to_string(i));
  }
  StepResult r = finish(best);
  r.iterations = 1;
  return r;
}

StepResult StepEngine::fractional(std::size_t i, double f_prev) {
  const std::size_t n = lines_.size();
  std::vector<std::size_t> current(n);
  for (std::size_t k = 0; k < n; ++k) current[k] = lines_[k].options.size() - 1;
  double lambda = numerator(current) / (gross_ - ceded(current));
  const double tol = config_.dinkelbach_tol * aggregate_intensity(spec_) * f_prev;

  StepResult out;
  std::vector<std::size_t> next(n);
  for (int iter = 0; iter < config_.dinkelbach_max_iter; ++iter) {
    ++out.iterations;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& t = lines_[k];
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c : active_[k]) {
        const double v = t.intensity * values_[k][c] + lambda * t.cost[c];
        if (v < best) {
          best = v;
          next[k] = c;
        }
      }
    }
    double d = gross_ - ceded(next);
    if (d < floor_) {
      // The separable minimizer violates the premium floor; solve the
      // coupled problem exactly.
      ++out.fallbacks;
      next = constrained_inner(lambda, current);
      d = gross_ - ceded(next);
    }
    const double num = numerator(next);
    if (num - lambda * d >= -tol) break;
    const double ratio = num / d;
    if (!(ratio < lambda)) break;
    current = next;
    lambda = ratio;
  }
  (void)i;
  StepResult r = finish(current);
  r.iterations = out.iterations;
  r.fallbacks = out.fallbacks;
  return r;
}

std::vector<std::size_t> StepEngine::constrained_inner(double lambda, const std::vector<std::size_t>& incumbent) {
  const std::size_t n = lines_.size();
  const double budget = gross_ - floor_;
  struct Entry {
    double v;
    double cost;
    std::size_t c;
  };
  std::vector<std::vector<Entry>> sorted(n);
  std::vector<double> min_v_rest(n + 1, 0.0), min_cost_rest(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t c : active_[k]) {
      sorted[k].push_back({lines_[k].intensity * values_[k][c] + lambda * lines_[k].cost[c], lines_[k].cost[c], c});
    }
    std::stable_sort(sorted[k].begin(), sorted[k].end(), [](const Entry& a, const Entry& b) { return a.v < b.v; });
  }
  for (std::size_t k = n; k-- > 0;) {
    double mc = std::numeric_limits<double>::infinity();
    for (const auto& e : sorted[k]) mc = std::min(mc, e.cost);
    min_v_rest[k] = min_v_rest[k + 1] + sorted[k].front().v;
    min_cost_rest[k] = min_cost_rest[k + 1] + mc;
  }

  std::vector<std::size_t> best = incumbent, path(n);
  double best_v = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    best_v += lines_[k].intensity * values_[k][incumbent[k]] + lambda * lines_[k].cost[incumbent[k]];
  }
  std::function<void(std::size_t, double, double)> search = [&](std::size_t k, double v, double cost) {
    if (k == n) {
      if (v < best_v) {
        best_v = v;
        best = path;
      }
      return;
    }
    for (const auto& e : sorted[k]) {
      if (v + e.v + min_v_rest[k + 1] >= best_v) break;
      if (cost + e.cost + min_cost_rest[k + 1] > budget) continue;
      path[k] = e.c;
      search(k + 1, v + e.v, cost + e.cost);
    }
  };
  search(0, 0.0, 0.0);
  return best;
}

StepResult StepEngine::shared(std::size_t i) {
  const std::size_t n = lines_.size();
  const std::size_t count = lines_.front().options.size();
  std::vector<std::size_t> choice(n), best;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < count; ++c) {
    std::fill(choice.begin(), choice.end(), c);
    const double cost = ceded(choice);
    if (gross_ - cost < floor_) continue;
    std::size_t deviation = kNever;
    for (const auto& t : lines_) deviation = std::min(deviation, t.deviation[c]);
    if (i < deviation && cost > 0.0) continue;
    const double ratio = numerator(choice) / (gross_ - cost);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = choice;
    }
  }
  if (best.empty()) {
    throw SolverError(SolverError::Kind::no_admissible_strategy,
                      "no admissible shared contract at grid index " + std::to_string(i));
  }
  StepResult r = finish(best);
  r.iterations = 1;
  return r;
}

}  // namespace optreins
