#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peakbandit/noise.hpp"

namespace peakbandit {

enum class ShapeTag { increasing_concave, decreasing, single_peaked, constant, unvalidated };

std::string_view to_string(ShapeTag tag);

/// Tolerance on first and second differences used by every shape check.
inline constexpr double kShapeTolerance = 1e-9;

/// True when `values` (f(1), f(2), ...) has the declared shape.
///   increasing_concave: nondecreasing with nonpositive second differences
///   decreasing:         nonincreasing
///   constant:           all equal
///   single_peaked:      increasing and concave up to some m, nonincreasing after
///   unvalidated:        always true
bool satisfies_shape(std::span<const double> values, ShapeTag tag, double tol = kShapeTolerance);

/// Tipping point of a single-peaked tabulation: the last index (1-based) of
/// the longest nondecreasing prefix. Empty if the tabulation is not single-peaked.
std::optional<std::size_t> tipping_point(std::span<const double> values,
                                         double tol = kShapeTolerance);

/// Most specific tag the values satisfy, in the order constant, decreasing,
/// increasing_concave, single_peaked; unvalidated otherwise.
ShapeTag classify_shape(std::span<const double> values, double tol = kShapeTolerance);

/// Tabulated per-pull reward f(m), m = 1..length, with prefix sums F(m).
class RewardCurve {
 public:
  /// Throws std::invalid_argument if empty, a value is outside [0,1] or
  /// non-finite, or the values do not satisfy `tag`.
  RewardCurve(std::vector<double> values, ShapeTag tag);

  /// Builds a curve tagged with classify_shape(values).
  static RewardCurve classified(std::vector<double> values);

  /// f(m); throws std::out_of_range unless 1 <= m <= length().
  double at(std::size_t m) const;
  /// F(m) = f(1) + ... + f(m), with F(0) = 0.
  double cumulative(std::size_t m) const;

  std::size_t length() const { return values_.size(); }
  ShapeTag shape() const { return shape_; }
  /// f(length), the asymptote proxy.
  double tail() const { return values_.back(); }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
  std::vector<double> prefix_;
  ShapeTag shape_;
};

double evaluate_curve(const RewardCurve& curve, std::size_t m);

struct BanditInstance {
  std::vector<RewardCurve> arms;
  NoiseModel noise;

  std::size_t num_arms() const { return arms.size(); }
  /// Largest horizon every curve supports.
  std::size_t max_horizon() const;
};

struct Step {
  std::size_t t = 0;  // 1-based
  std::size_t arm = 0;
  double observed = 0.0;
  double true_reward = 0.0;

  bool operator==(const Step&) const = default;
};

struct RunTrace {
  std::vector<Step> steps;
  std::vector<std::size_t> pull_counts;

  bool operator==(const RunTrace&) const = default;
};

/// Sequential decision rule driven by simulate_run. Stochastic policies own
/// their random stream, seeded at construction.
class Algorithm {
 public:
  virtual ~Algorithm() = default;

  virtual std::string name() const = 0;
  /// Resets all state for a fresh run of `horizon` pulls over `num_arms` arms.
  virtual void start(std::size_t num_arms, std::size_t horizon) = 0;
  /// Arm to pull at step t (1-based).
  virtual std::size_t select(std::size_t t) = 0;
  /// Called exactly once per step with the pulled arm and its observation.
  virtual void observe(std::size_t arm, double reward, std::size_t t) = 0;
};

/// Runs `algorithm` for exactly `horizon` pulls. Observation noise is drawn
/// from a stream seeded with `noise_seed`.
RunTrace simulate_run(const BanditInstance& instance, Algorithm& algorithm, std::size_t horizon,
                      std::uint64_t noise_seed);

/// r_T = sum_i F_i(n_i), from the true curves.
double cumulative_reward(const RunTrace& trace, const BanditInstance& instance);
double cumulative_reward(std::span<const std::size_t> pull_counts, const BanditInstance& instance);

/// Lowest index among the maxima of `values`.
std::size_t argmax_lowest(std::span<const double> values);

}  // namespace peakbandit
