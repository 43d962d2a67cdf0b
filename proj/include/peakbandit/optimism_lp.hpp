#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "peakbandit/lp_solver.hpp"
#include "peakbandit/noise.hpp"

namespace peakbandit {

/// Per-pull confidence intervals [lower_j, upper_j] for one arm, clipped to [0,1].
struct ConfidenceBand {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  bool empty() const { return lower.empty(); }
  /// Appends one interval, clipped to [0,1].
  void push(double lo, double hi);
};

/// Two-sided standard normal quantile: z with P(|Z| > z) = delta.
double normal_two_sided_quantile(double delta);

/// Half-width of the interval around one observation: the bound for bounded
/// noise, z(delta)*sigma for Gaussian noise (delta must lie in (0,1)), 0 without noise.
double confidence_half_width(const NoiseModel& noise, std::size_t arm, double delta);

ConfidenceBand build_confidence_band(std::span<const double> observations,
                                     const NoiseModel& noise, std::size_t arm, double delta);

/// Per-observation failure probability so that all of `horizon` intervals
/// hold jointly with probability at least 1 - epsilon.
double delta_for_horizon(double epsilon, std::size_t horizon);

/// Shape-constrained program over v_1..v_{n+K}: maximize the sum of the K
/// future values subject to 0 <= v <= 1, the band on the first n values,
/// monotonicity and concavity.
struct StarProblem {
  ConfidenceBand band;
  std::size_t future_steps = 0;
};

struct StarOutcome {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> witness;  // n + K values when feasible

  static StarOutcome infeasible() { return {}; }
};

/// Tolerance on constraint residuals of witnesses and feasibility decisions.
inline constexpr double kStarTolerance = 1e-9;

/// Maximum of sum_{k=1..K} min(1, base + slope*k), also for slope < 0.
double capped_sum_any_slope(double base, double slope, std::size_t steps);

/// Feasible set of the last two values (v_{n-1}, v_n) of every bounded,
/// increasing, concave sequence threading the intervals pushed so far. The
/// set is a convex polygon maintained incrementally; the best future sum is
/// a concave function of that pair, so the optimum of the full program is
/// found on the polygon boundary without touching the earlier variables.
class ShapeRegion {
 public:
  ShapeRegion() : ShapeRegion(false) {}
  explicit ShapeRegion(bool keep_history) : keep_history_(keep_history) {}

  struct Point {
    double x = 0.0;  // v_{n-1}
    double y = 0.0;  // v_n
  };
  using Polygon = std::vector<Point>;

  /// Adds the interval of the next value. Returns false once infeasible.
  bool push(double lower, double upper);

  bool feasible() const { return feasible_; }
  std::size_t size() const { return count_; }
  const Polygon& polygon() const { return polygon_; }

  /// Best sum of the next `future_steps` values; requires feasible() and size() >= 1.
  double best_future_sum(std::size_t future_steps) const;

  /// Optimum with a full witness v_1..v_{n+K}; requires keep_history.
  StarOutcome solve(std::size_t future_steps) const;

  // Relaxation applied to the monotonicity and concavity rows.
  static constexpr double kShapeSlack = 1e-10;
  // Without history, polygons above this many vertices are replaced by a
  // slightly larger one with fewer vertices (optima move up by O(K^2 * 1e-10)).
  static constexpr std::size_t kCompactAbove = 32;

 private:
  Point best_pair(std::size_t future_steps, double* value) const;

  bool keep_history_;
  bool feasible_ = true;
  std::size_t count_ = 0;
  double first_lo_ = 0.0;
  double first_hi_ = 0.0;
  Polygon polygon_;
  std::vector<Polygon> history_;  // history_[j] is the polygon after j+2 values
};

/// Structure-exploiting solver (polygon propagation).
StarOutcome solve_star(const StarProblem& problem);

/// The program written out for the generic simplex solver.
LinearProgram star_program(const StarProblem& problem);

/// Same problem through the generic bounded-variable simplex.
StarOutcome solve_star_lp(const StarProblem& problem);

/// Largest violation of any constraint group by `witness`.
double star_violation(const StarProblem& problem, std::span<const double> witness);

/// Optimistic future reward from a band: the program's optimum when feasible,
/// otherwise upper_n * (T - t). Zero when t >= T.
double noisy_optimistic_reward(const ConfidenceBand& band, std::size_t t, std::size_t horizon);

}  // namespace peakbandit
