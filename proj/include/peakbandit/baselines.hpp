#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peakbandit/core.hpp"
#include "peakbandit/optimism_lp.hpp"

namespace peakbandit {

/// Tuning parameters; unset fields take horizon-dependent defaults.
struct BaselineConfig {
  std::optional<double> exp3_gamma;
  std::optional<std::size_t> rexp3_batch;
  std::optional<double> ucb_exploration;
  std::optional<double> ducb_discount;
  std::optional<double> ducb_padding;
  std::optional<std::size_t> swucb_window;
};

struct ResolvedBaselineConfig {
  double exp3_gamma = 1.0;
  std::size_t rexp3_batch = 1;
  double rexp3_gamma = 1.0;  // EXP3 rate inside one batch
  double ucb_exploration = 2.0;
  double ducb_discount = 0.5;
  double ducb_padding = 2.0;
  std::size_t swucb_window = 1;
};

/// min{1, sqrt(N ln N / ((e-1) T))}
double default_exp3_gamma(std::size_t num_arms, std::size_t horizon);

/// Fills the unset fields from N and T and validates the ranges.
/// Throws std::invalid_argument on out-of-range values.
ResolvedBaselineConfig resolve(const BaselineConfig& config, std::size_t num_arms,
                               std::size_t horizon);

/// Lowest unpulled arm if any, else the lowest-index argmax of the last rewards.
std::size_t greedy_select(std::span<const double> last_rewards, std::span<const bool> pulled);

/// min{1, last + max(0, last - prev)}
double one_step_bound(double last, double prev);

/// p_i = (1-gamma) w_i / sum(w) + gamma / N
std::vector<double> exp3_distribution(std::span<const double> weights, double gamma);

/// Multiplies the pulled weight by exp(gamma * (reward/p)/N) with the reward
/// clipped to [0,1], then rescales by the maximum if any weight exceeds 1e100.
void exp3_update(std::vector<double>& weights, double gamma, std::size_t arm, double reward,
                 double probability);

/// True when step t opens a new batch: (t-1) mod batch == 0.
bool rexp3_restart(std::size_t t, std::size_t batch);

class Greedy final : public Algorithm {
 public:
  std::string name() const override { return "greedy"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t arm, double reward, std::size_t t) override;

 private:
  std::vector<double> last_;
  std::vector<bool> pulled_;
};

/// Myopic variant of SPO: same warm-up, then the best bound on the very next reward.
class OneStepOptimistic final : public Algorithm {
 public:
  explicit OneStepOptimistic(NoiseModel noise, double epsilon = 0.05);
  std::string name() const override { return "one_step_optimistic"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t arm, double reward, std::size_t t) override;

 private:
  struct ArmState {
    double last = 0.0;
    double prev = 0.0;
    double last_upper = 0.0;
    bool decreasing = false;
    ShapeRegion region;
  };

  NoiseModel noise_;
  double epsilon_;
  bool noisy_ = false;
  std::size_t init_length_ = 2;
  std::vector<double> half_width_;
  std::vector<ArmState> arms_;
  std::vector<double> bounds_;
};

class Exp3 : public Algorithm {
 public:
  Exp3(BaselineConfig config, std::uint64_t seed);
  std::string name() const override { return "exp3"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t arm, double reward, std::size_t t) override;

  double gamma() const { return gamma_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& distribution() const { return probs_; }

 protected:
  BaselineConfig config_;
  ResolvedBaselineConfig resolved_;
  double gamma_ = 1.0;
  std::vector<double> weights_;
  std::vector<double> probs_;

 private:
  std::uint64_t seed_;
  Rng rng_;
};

/// EXP3 restarted every `rexp3_batch` steps.
class RExp3 final : public Exp3 {
 public:
  using Exp3::Exp3;
  std::string name() const override { return "rexp3"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
};

/// mean_i + sqrt(c) * sqrt(ln n / n_i), n the number of pulls so far.
class Ucb final : public Algorithm {
 public:
  explicit Ucb(BaselineConfig config = {}) : config_(config) {}
  std::string name() const override { return "ucb"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t arm, double reward, std::size_t t) override;

 private:
  BaselineConfig config_;
  double root_c_ = 0.0;
  std::vector<double> counts_;
  std::vector<double> sums_;
  std::vector<double> index_;
  double total_ = 0.0;
};

/// Discounted UCB: statistics decay by gamma each step.
class DUcb final : public Algorithm {
 public:
  explicit DUcb(BaselineConfig config = {}) : config_(config) {}
  std::string name() const override { return "ducb"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t arm, double reward, std::size_t t) override;

 private:
  BaselineConfig config_;
  double discount_ = 1.0;
  double padding_ = 0.0;
  std::vector<double> counts_;
  std::vector<double> sums_;
  std::vector<bool> pulled_;
  std::vector<double> index_;
};

/// Sliding-window UCB over the last tau steps.
class SwUcb final : public Algorithm {
 public:
  explicit SwUcb(BaselineConfig config = {}) : config_(config) {}
  std::string name() const override { return "swucb"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t arm, double reward, std::size_t t) override;

 private:
  BaselineConfig config_;
  std::size_t window_ = 1;
  double root_c_ = 0.0;
  std::deque<std::pair<std::size_t, double>> recent_;
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
  std::vector<double> index_;
};

}  // namespace peakbandit
