#include "peakbandit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "peakbandit/spo.hpp"

namespace peakbandit {

double default_exp3_gamma(std::size_t num_arms, std::size_t horizon) {
  const double n = static_cast<double>(num_arms);
  const double t = static_cast<double>(horizon);
  if (num_arms < 2) return 1.0;
  return std::min(1.0, std::sqrt(n * std::log(n) / ((std::numbers::e - 1.0) * t)));
}

ResolvedBaselineConfig resolve(const BaselineConfig& config, std::size_t num_arms,
                               std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  const double t = static_cast<double>(horizon);
  ResolvedBaselineConfig r;
  r.exp3_gamma = config.exp3_gamma.value_or(default_exp3_gamma(num_arms, horizon));
  r.rexp3_batch = config.rexp3_batch.value_or(
      static_cast<std::size_t>(std::ceil(std::pow(t, 2.0 / 3.0) - 1e-9)));
  r.rexp3_gamma = default_exp3_gamma(num_arms, r.rexp3_batch);
  r.ucb_exploration = config.ucb_exploration.value_or(2.0);
  r.ducb_discount = config.ducb_discount.value_or(1.0 - 1.0 / (4.0 * std::sqrt(t)));
  r.ducb_padding = config.ducb_padding.value_or(2.0);
  r.swucb_window = config.swucb_window.value_or(
      static_cast<std::size_t>(std::ceil(4.0 * std::sqrt(t * std::log(t)))));
  r.swucb_window = std::max<std::size_t>(r.swucb_window, 1);

  if (!(r.exp3_gamma > 0.0 && r.exp3_gamma <= 1.0)) {
    throw std::invalid_argument("exp3_gamma must lie in (0,1]");
  }
  if (r.rexp3_batch == 0) throw std::invalid_argument("rexp3_batch must be positive");
  if (!(r.ucb_exploration > 0.0)) throw std::invalid_argument("ucb_exploration must be > 0");
  // a discount of exactly 1 is allowed: it reduces D-UCB to plain UCB
  if (!(r.ducb_discount > 0.0 && r.ducb_discount <= 1.0)) {
    throw std::invalid_argument("ducb_discount must lie in (0,1]");
  }
  if (!(r.ducb_padding > 0.0)) throw std::invalid_argument("ducb_padding must be > 0");
  if (config.swucb_window && *config.swucb_window == 0) {
    throw std::invalid_argument("swucb_window must be positive");
  }
  return r;
}

std::size_t greedy_select(std::span<const double> last_rewards, std::span<const bool> pulled) {
  for (std::size_t i = 0; i < pulled.size(); ++i) {
    if (!pulled[i]) return i;
  }
  return argmax_lowest(last_rewards);
}

double one_step_bound(double last, double prev) {
  return std::min(1.0, last + std::max(0.0, last - prev));
}

std::vector<double> exp3_distribution(std::span<const double> weights, double gamma) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double n = static_cast<double>(weights.size());
  std::vector<double> p(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    p[i] = (1.0 - gamma) * weights[i] / total + gamma / n;
  }
  return p;
}

void exp3_update(std::vector<double>& weights, double gamma, std::size_t arm, double reward,
                 double probability) {
  const double r = std::clamp(reward, 0.0, 1.0);
  if (r == 0.0) return;
  const double n = static_cast<double>(weights.size());
  weights.at(arm) *= std::exp(gamma * (r / probability) / n);
  const double top = *std::max_element(weights.begin(), weights.end());
  if (top > 1e100) {
    // keep losing arms strictly positive after repeated rescaling
    for (double& w : weights) w = std::max(w / top, std::numeric_limits<double>::min());
  }
}

bool rexp3_restart(std::size_t t, std::size_t batch) {
  if (batch == 0) throw std::invalid_argument("batch must be positive");
  return (t - 1) % batch == 0;
}

void Greedy::start(std::size_t num_arms, std::size_t /*horizon*/) {
  last_.assign(num_arms, 0.0);
  pulled_.assign(num_arms, false);
}

std::size_t Greedy::select(std::size_t /*t*/) {
  for (std::size_t i = 0; i < pulled_.size(); ++i) {
    if (!pulled_[i]) return i;
  }
  return argmax_lowest(last_);
}

void Greedy::observe(std::size_t arm, double reward, std::size_t /*t*/) {
  last_.at(arm) = reward;
  pulled_[arm] = true;
}

OneStepOptimistic::OneStepOptimistic(NoiseModel noise, double epsilon)
    : noise_(std::move(noise)), epsilon_(epsilon) {}

void OneStepOptimistic::start(std::size_t num_arms, std::size_t horizon) {
  init_length_ = spo_init_length(horizon);
  noisy_ = !noise_.is_noise_free();
  half_width_.assign(num_arms, 0.0);
  if (noisy_) {
    const double delta = delta_for_horizon(epsilon_, horizon);
    for (std::size_t i = 0; i < num_arms; ++i) {
      half_width_[i] = confidence_half_width(noise_, i, delta);
    }
  }
  arms_.assign(num_arms, ArmState{});
  bounds_.assign(num_arms, 0.0);
}

std::size_t OneStepOptimistic::select(std::size_t t) {
  const std::size_t n = arms_.size();
  const std::size_t done = t - 1;
  if (done < n * init_length_) return done % n;
  for (std::size_t i = 0; i < n; ++i) {
    const ArmState& a = arms_[i];
    if (!noisy_) {
      bounds_[i] = one_step_bound(a.last, a.prev);
    } else if (a.decreasing) {
      bounds_[i] = a.last_upper;
    } else {
      bounds_[i] = a.region.best_future_sum(1);
    }
  }
  return argmax_lowest(bounds_);
}

void OneStepOptimistic::observe(std::size_t arm, double reward, std::size_t /*t*/) {
  ArmState& a = arms_.at(arm);
  a.prev = a.last;
  a.last = reward;
  if (!noisy_) return;
  const double lo = reward - half_width_[arm];
  const double hi = reward + half_width_[arm];
  a.last_upper = std::clamp(hi, 0.0, 1.0);
  if (!a.decreasing && !a.region.push(lo, hi)) {
    a.decreasing = true;
    a.region = ShapeRegion{};
  }
}

Exp3::Exp3(BaselineConfig config, std::uint64_t seed)
    : config_(config), seed_(seed), rng_(seed) {}

void Exp3::start(std::size_t num_arms, std::size_t horizon) {
  resolved_ = resolve(config_, num_arms, horizon);
  gamma_ = resolved_.exp3_gamma;
  weights_.assign(num_arms, 1.0);
  probs_.assign(num_arms, 1.0 / static_cast<double>(num_arms));
  rng_.seed(seed_);
}

std::size_t Exp3::select(std::size_t /*t*/) {
  probs_ = exp3_distribution(weights_, gamma_);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    acc += probs_[i];
    if (u < acc) return i;
  }
  // rounding left u above the accumulated mass
  for (std::size_t i = probs_.size(); i-- > 0;) {
    if (probs_[i] > 0.0) return i;
  }
  return 0;
}

void Exp3::observe(std::size_t arm, double reward, std::size_t /*t*/) {
  exp3_update(weights_, gamma_, arm, reward, probs_.at(arm));
}

void RExp3::start(std::size_t num_arms, std::size_t horizon) {
  Exp3::start(num_arms, horizon);
  gamma_ = resolved_.rexp3_gamma;
}

std::size_t RExp3::select(std::size_t t) {
  if (rexp3_restart(t, resolved_.rexp3_batch)) std::fill(weights_.begin(), weights_.end(), 1.0);
  return Exp3::select(t);
}

void Ucb::start(std::size_t num_arms, std::size_t horizon) {
  root_c_ = std::sqrt(resolve(config_, num_arms, horizon).ucb_exploration);
  counts_.assign(num_arms, 0.0);
  sums_.assign(num_arms, 0.0);
  index_.assign(num_arms, 0.0);
  total_ = 0.0;
}

std::size_t Ucb::select(std::size_t /*t*/) {
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == 0.0) return i;
  }
  const double log_n = std::log(total_);
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    index_[i] = sums_[i] / counts_[i] + root_c_ * std::sqrt(log_n / counts_[i]);
  }
  return argmax_lowest(index_);
}

void Ucb::observe(std::size_t arm, double reward, std::size_t /*t*/) {
  counts_.at(arm) += 1.0;
  sums_[arm] += reward;
  total_ += 1.0;
}

void DUcb::start(std::size_t num_arms, std::size_t horizon) {
  const ResolvedBaselineConfig r = resolve(config_, num_arms, horizon);
  discount_ = r.ducb_discount;
  padding_ = r.ducb_padding;
  counts_.assign(num_arms, 0.0);
  sums_.assign(num_arms, 0.0);
  pulled_.assign(num_arms, false);
  index_.assign(num_arms, 0.0);
}

std::size_t DUcb::select(std::size_t /*t*/) {
  for (std::size_t i = 0; i < pulled_.size(); ++i) {
    if (!pulled_[i]) return i;
  }
  double total = 0.0;
  for (double c : counts_) total += c;
  const double log_n = std::log(total);
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    index_[i] = sums_[i] / counts_[i] + padding_ * std::sqrt(log_n / counts_[i]);
  }
  return argmax_lowest(index_);
}

void DUcb::observe(std::size_t arm, double reward, std::size_t /*t*/) {
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    counts_[i] *= discount_;
    sums_[i] *= discount_;
  }
  counts_.at(arm) += 1.0;
  sums_[arm] += reward;
  pulled_[arm] = true;
}

void SwUcb::start(std::size_t num_arms, std::size_t horizon) {
  const ResolvedBaselineConfig r = resolve(config_, num_arms, horizon);
  window_ = r.swucb_window;
  root_c_ = std::sqrt(r.ucb_exploration);
  recent_.clear();
  counts_.assign(num_arms, 0);
  sums_.assign(num_arms, 0.0);
  index_.assign(num_arms, 0.0);
}

std::size_t SwUcb::select(std::size_t /*t*/) {
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == 0) return i;
  }
  const double log_n = std::log(static_cast<double>(recent_.size()));
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const double c = static_cast<double>(counts_[i]);
    index_[i] = sums_[i] / c + root_c_ * std::sqrt(log_n / c);
  }
  return argmax_lowest(index_);
}

void SwUcb::observe(std::size_t arm, double reward, std::size_t /*t*/) {
  recent_.emplace_back(arm, reward);
  ++counts_.at(arm);
  sums_[arm] += reward;
  if (recent_.size() > window_) {
    const auto [old_arm, old_reward] = recent_.front();
    recent_.pop_front();
    if (--counts_[old_arm] == 0) {
      sums_[old_arm] = 0.0;
    } else {
      sums_[old_arm] -= old_reward;
    }
  }
}

}  // namespace peakbandit
