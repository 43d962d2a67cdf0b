#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "peakbandit/core.hpp"
#include "peakbandit/optimism_lp.hpp"

namespace peakbandit {

/// Pulls per arm in the warm-up phase: max(ceil(ln T), 2).
std::size_t spo_init_length(std::size_t horizon);

/// sum_{k=1..steps} min(1, base + slope*k) in closed form; slope >= 0.
double capped_linear_sum(double base, double slope, std::size_t steps);

/// Noise-free optimistic value of an arm whose two latest rewards are `last`
/// and `prev`, with `t` pulls made out of `horizon`.
double optimistic_future_reward(double last, double prev, std::size_t t, std::size_t horizon);

/// Lowest-index argmax of the optimistic values.
std::size_t spo_select(std::span<const double> optimistic_values);

/// Single-peaked optimism. Without noise it extrapolates the last two
/// observations; with noise each arm keeps a ShapeRegion built from its
/// confidence band and falls back to the latest upper bound once the region
/// becomes empty.
class Spo final : public Algorithm {
 public:
  struct Options {
    double epsilon = 0.05;  // joint failure budget of the confidence band
  };

  explicit Spo(NoiseModel noise) : Spo(std::move(noise), Options{}) {}
  Spo(NoiseModel noise, Options options);

  std::string name() const override { return "spo"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t arm, double reward, std::size_t t) override;

  std::size_t init_length() const { return init_length_; }
  double per_observation_delta() const { return delta_; }
  /// Optimistic values from the last select() call in the main phase. Under
  /// noise, entries of arms that could not win are upper bounds.
  const std::vector<double>& optimistic_values() const { return optimism_; }

 private:
  struct ArmState {
    std::size_t pulls = 0;
    double last = 0.0;
    double prev = 0.0;
    double last_upper = 0.0;
    bool decreasing = false;
    bool cached = false;         // optimism_ holds a value for the current region
    std::size_t cached_at = 0;   // remaining steps it was computed for
    ShapeRegion region;
  };

  double arm_optimism(const ArmState& arm, std::size_t remaining) const;

  NoiseModel noise_;
  Options options_;
  bool noisy_ = false;
  std::size_t horizon_ = 0;
  std::size_t init_length_ = 2;
  double delta_ = 0.0;
  std::vector<double> half_width_;
  std::vector<ArmState> arms_;
  std::vector<double> optimism_;
  std::vector<std::size_t> order_;
};

}  // namespace peakbandit
