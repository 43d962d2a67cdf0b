#include "peakbandit/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace peakbandit {

std::string_view to_string(ShapeTag tag) {
  switch (tag) {
    case ShapeTag::increasing_concave:
      return "increasing_concave";
    case ShapeTag::decreasing:
      return "decreasing";
    case ShapeTag::single_peaked:
      return "single_peaked";
    case ShapeTag::constant:
      return "constant";
    case ShapeTag::unvalidated:
      return "unvalidated";
  }
  return "unknown";
}

namespace {

bool nonincreasing_from(std::span<const double> v, std::size_t first, double tol) {
  for (std::size_t i = first + 1; i < v.size(); ++i) {
    if (v[i] - v[i - 1] > tol) return false;
  }
  return true;
}

bool concave_upto(std::span<const double> v, std::size_t count, double tol) {
  for (std::size_t i = 2; i < count; ++i) {
    if (v[i] - 2.0 * v[i - 1] + v[i - 2] > tol) return false;
  }
  return true;
}

std::size_t nondecreasing_prefix(std::span<const double> v, double tol) {
  std::size_t m = v.empty() ? 0 : 1;
  while (m < v.size() && v[m] - v[m - 1] >= -tol) ++m;
  return m;
}

}  // namespace

std::optional<std::size_t> tipping_point(std::span<const double> values, double tol) {
  if (values.empty()) return std::nullopt;
  const std::size_t peak = nondecreasing_prefix(values, tol);
  if (!concave_upto(values, peak, tol)) return std::nullopt;
  if (!nonincreasing_from(values, peak - 1, tol)) return std::nullopt;
  return peak;
}

bool satisfies_shape(std::span<const double> values, ShapeTag tag, double tol) {
  switch (tag) {
    case ShapeTag::unvalidated:
      return true;
    case ShapeTag::constant: {
      if (values.empty()) return true;
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      return *hi - *lo <= tol;
    }
    case ShapeTag::decreasing:
      return nonincreasing_from(values, 0, tol);
    case ShapeTag::increasing_concave:
      return nondecreasing_prefix(values, tol) == values.size() &&
             concave_upto(values, values.size(), tol);
    case ShapeTag::single_peaked:
      return tipping_point(values, tol).has_value();
  }
  return false;
}

ShapeTag classify_shape(std::span<const double> values, double tol) {
  for (ShapeTag tag : {ShapeTag::constant, ShapeTag::decreasing, ShapeTag::increasing_concave,
                       ShapeTag::single_peaked}) {
    if (satisfies_shape(values, tag, tol)) return tag;
  }
  return ShapeTag::unvalidated;
}

RewardCurve::RewardCurve(std::vector<double> values, ShapeTag tag)
    : values_(std::move(values)), shape_(tag) {
  if (values_.empty()) throw std::invalid_argument("reward curve must have at least one value");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("reward value f(" + std::to_string(i + 1) + ") = " +
                                  std::to_string(v) + " outside [0,1]");
    }
  }
  if (!satisfies_shape(values_, shape_)) {
    throw std::invalid_argument("reward curve does not satisfy declared shape " +
                                std::string(to_string(shape_)));
  }
  prefix_.resize(values_.size() + 1, 0.0);
  for (std::size_t i = 0; i < values_.size(); ++i) prefix_[i + 1] = prefix_[i] + values_[i];
}

RewardCurve RewardCurve::classified(std::vector<double> values) {
  const ShapeTag tag = classify_shape(values);
  return RewardCurve(std::move(values), tag);
}

double RewardCurve::at(std::size_t m) const {
  if (m < 1 || m > values_.size()) {
    throw std::out_of_range("pull " + std::to_string(m) + " outside curve of length " +
                            std::to_string(values_.size()));
  }
  return values_[m - 1];
}

double RewardCurve::cumulative(std::size_t m) const {
  if (m > values_.size()) {
    throw std::out_of_range("cumulative reward requested for " + std::to_string(m) +
                            " pulls on curve of length " + std::to_string(values_.size()));
  }
  return prefix_[m];
}

double evaluate_curve(const RewardCurve& curve, std::size_t m) { return curve.at(m); }

std::size_t BanditInstance::max_horizon() const {
  std::size_t h = arms.empty() ? 0 : arms.front().length();
  for (const auto& c : arms) h = std::min(h, c.length());
  return h;
}

RunTrace simulate_run(const BanditInstance& instance, Algorithm& algorithm, std::size_t horizon,
                      std::uint64_t noise_seed) {
  const std::size_t n = instance.num_arms();
  if (n == 0) throw std::invalid_argument("instance has no arms");
  if (horizon > instance.max_horizon()) {
    throw std::invalid_argument("horizon " + std::to_string(horizon) +
                                " exceeds the shortest curve (" +
                                std::to_string(instance.max_horizon()) + ")");
  }
  Rng rng(noise_seed);
  RunTrace trace;
  trace.pull_counts.assign(n, 0);
  trace.steps.reserve(horizon);
  algorithm.start(n, horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const std::size_t arm = algorithm.select(t);
    if (arm >= n) {
      throw std::logic_error(algorithm.name() + " selected arm " + std::to_string(arm) +
                             " of " + std::to_string(n));
    }
    const std::size_t m = ++trace.pull_counts[arm];
    const double truth = instance.arms[arm].at(m);
    const double observed = sample_observation(truth, instance.noise, arm, rng);
    trace.steps.push_back({t, arm, observed, truth});
    algorithm.observe(arm, observed, t);
  }
  return trace;
}

double cumulative_reward(std::span<const std::size_t> pull_counts,
                         const BanditInstance& instance) {
  double total = 0.0;
  for (std::size_t i = 0; i < pull_counts.size(); ++i) {
    total += instance.arms.at(i).cumulative(pull_counts[i]);
  }
  return total;
}

double cumulative_reward(const RunTrace& trace, const BanditInstance& instance) {
  if (trace.pull_counts.empty()) return 0.0;
  return cumulative_reward(std::span<const std::size_t>(trace.pull_counts), instance);
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace peakbandit
