#include "peakbandit/spo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace peakbandit {

std::size_t spo_init_length(std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  const auto ln = static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(horizon))));
  return std::max<std::size_t>(ln, 2);
}

double capped_linear_sum(double base, double slope, std::size_t steps) {
  if (slope < 0.0) throw std::invalid_argument("capped_linear_sum needs a nonnegative slope");
  return capped_sum_any_slope(base, slope, steps);
}

double optimistic_future_reward(double last, double prev, std::size_t t, std::size_t horizon) {
  if (t >= horizon) return 0.0;
  const std::size_t remaining = horizon - t;
  if (last >= prev) return capped_linear_sum(last, last - prev, remaining);
  return last * static_cast<double>(remaining);
}

std::size_t spo_select(std::span<const double> optimistic_values) {
  return argmax_lowest(optimistic_values);
}

Spo::Spo(NoiseModel noise, Options options) : noise_(std::move(noise)), options_(options) {}

void Spo::start(std::size_t num_arms, std::size_t horizon) {
  if (num_arms == 0) throw std::invalid_argument("spo needs at least one arm");
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  horizon_ = horizon;
  init_length_ = spo_init_length(horizon);
  noisy_ = !noise_.is_noise_free();
  delta_ = noisy_ ? delta_for_horizon(options_.epsilon, horizon) : 0.0;
  half_width_.assign(num_arms, 0.0);
  if (noisy_) {
    for (std::size_t i = 0; i < num_arms; ++i) {
      half_width_[i] = confidence_half_width(noise_, i, delta_);
    }
  }
  arms_.assign(num_arms, ArmState{});
  optimism_.assign(num_arms, 0.0);
}

double Spo::arm_optimism(const ArmState& arm, std::size_t remaining) const {
  if (!noisy_) {
    if (arm.last >= arm.prev) return capped_linear_sum(arm.last, arm.last - arm.prev, remaining);
    return arm.last * static_cast<double>(remaining);
  }
  if (arm.decreasing) return arm.last_upper * static_cast<double>(remaining);
  return arm.region.best_future_sum(remaining);
}

std::size_t Spo::select(std::size_t t) {
  const std::size_t n = arms_.size();
  const std::size_t done = t - 1;
  if (done < n * init_length_) return done % n;
  const std::size_t remaining = horizon_ > done ? horizon_ - done : 0;
  if (!noisy_) {
    for (std::size_t i = 0; i < n; ++i) optimism_[i] = arm_optimism(arms_[i], remaining);
    return spo_select(optimism_);
  }
  // A region's optimum can only shrink with the remaining steps, so a cached
  // value is an upper bound until the arm is pulled again. Arms whose bound
  // cannot beat the best exact value so far are not re-solved.
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    order_[i] = i;
    ArmState& a = arms_[i];
    if (a.decreasing || !a.cached) {
      optimism_[i] = arm_optimism(a, remaining);
      a.cached = true;
      a.cached_at = remaining;
    }
  }
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return optimism_[a] > optimism_[b]; });
  std::size_t best = order_.front();
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i : order_) {
    const double bound = optimism_[i];
    const double margin = 1e-9 * std::max(1.0, std::abs(bound));
    if (bound + margin < best_value) break;
    if (arms_[i].cached_at != remaining) {
      optimism_[i] = arm_optimism(arms_[i], remaining);
      arms_[i].cached_at = remaining;
    }
    const double v = optimism_[i];
    if (v > best_value || (v == best_value && i < best)) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

void Spo::observe(std::size_t arm, double reward, std::size_t /*t*/) {
  ArmState& a = arms_.at(arm);
  a.prev = a.last;
  a.last = reward;
  ++a.pulls;
  if (!noisy_) return;
  const double lo = reward - half_width_[arm];
  const double hi = reward + half_width_[arm];
  a.last_upper = std::clamp(hi, 0.0, 1.0);
  a.cached = false;
  if (!a.decreasing && !a.region.push(lo, hi)) {
    a.decreasing = true;
    a.region = ShapeRegion{};
  }
}

}  // namespace peakbandit
