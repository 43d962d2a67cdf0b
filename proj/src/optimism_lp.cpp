#include "peakbandit/optimism_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace peakbandit {

void ConfidenceBand::push(double lo, double hi) {
  lower.push_back(std::clamp(lo, 0.0, 1.0));
  upper.push_back(std::clamp(hi, 0.0, 1.0));
}

double normal_two_sided_quantile(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("two-sided quantile needs delta in (0,1), got " +
                                std::to_string(delta));
  }
  const boost::math::normal_distribution<double> standard(0.0, 1.0);
  return boost::math::quantile(boost::math::complement(standard, delta / 2.0));
}

double confidence_half_width(const NoiseModel& noise, std::size_t arm, double delta) {
  switch (noise.kind()) {
    case NoiseKind::none:
      return 0.0;
    case NoiseKind::bounded_uniform:
      return noise.scale(arm);
    case NoiseKind::gaussian:
      if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument(
            "gaussian confidence band needs delta in (0,1); delta = 0 asks for an infinite "
            "interval");
      }
      return normal_two_sided_quantile(delta) * noise.scale(arm);
  }
  return 0.0;
}

ConfidenceBand build_confidence_band(std::span<const double> observations,
                                     const NoiseModel& noise, std::size_t arm, double delta) {
  const double half = confidence_half_width(noise, arm, delta);
  ConfidenceBand band;
  band.lower.reserve(observations.size());
  band.upper.reserve(observations.size());
  for (double obs : observations) band.push(obs - half, obs + half);
  return band;
}

double delta_for_horizon(double epsilon, std::size_t horizon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0,1)");
  }
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  return -std::expm1(std::log1p(-epsilon) / static_cast<double>(horizon));
}

namespace {

// Terms k in 1..steps with base + slope*k < 1: their count and sum of k.
struct Uncapped {
  double count = 0.0;
  double sum_k = 0.0;
};

double triangular(double c) { return c * (c + 1.0) / 2.0; }

Uncapped uncapped_terms(double base, double slope, std::size_t steps) {
  const double k_max = static_cast<double>(steps);
  if (slope == 0.0) {
    return base < 1.0 ? Uncapped{k_max, triangular(k_max)} : Uncapped{};
  }
  if (slope > 0.0) {
    if (base >= 1.0) return {};
    // largest c with base + c*slope < 1
    const double q = (1.0 - base) / slope;
    double c = q >= k_max + 1.0 ? k_max : std::max(0.0, std::ceil(q) - 1.0);
    while (c < k_max && base + (c + 1.0) * slope < 1.0) c += 1.0;
    while (c > 0.0 && base + c * slope >= 1.0) c -= 1.0;
    return {c, triangular(c)};
  }
  // slope < 0: the first terms may be capped, the rest are not
  const double q = (base - 1.0) / -slope;
  double capped = q < 0.0 ? 0.0 : std::min(k_max, std::floor(q));
  while (capped < k_max && base + (capped + 1.0) * slope >= 1.0) capped += 1.0;
  while (capped > 0.0 && base + capped * slope < 1.0) capped -= 1.0;
  return {k_max - capped, triangular(k_max) - triangular(capped)};
}

using Point = ShapeRegion::Point;
using Polygon = ShapeRegion::Polygon;

constexpr double kClipEps = 1e-12;
constexpr double kSameEps = 1e-14;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool same(const Point& a, const Point& b) {
  return std::abs(a.x - b.x) <= kSameEps && std::abs(a.y - b.y) <= kSameEps;
}

void dedupe(Polygon& poly) {
  Polygon out;
  out.reserve(poly.size());
  for (const Point& p : poly) {
    if (out.empty() || !same(out.back(), p)) out.push_back(p);
  }
  while (out.size() > 1 && same(out.front(), out.back())) out.pop_back();
  poly.swap(out);
}

// Counter-clockwise hull without collinear points (Andrew's monotone chain).
Polygon convex_hull(Polygon pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  dedupe(pts);
  if (pts.size() <= 2) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower_size = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower_size && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Merges short edges of a counter-clockwise convex polygon into the meeting
// point of their neighbouring edges when that point lies within kCompactEps
// of the edge. The result contains the input, so optima over it stay upper
// bounds; each call moves the boundary by at most kCompactBudget in total.
constexpr double kCompactEps = 1e-10;
constexpr double kCompactBudget = 1e-9;

void compact(Polygon& poly) {
  const std::size_t n = poly.size();
  if (n <= 4) return;
  Polygon out;
  out.reserve(n);
  out.push_back(poly.front());
  double spent = 0.0;
  std::size_t i = 1;
  for (; i + 1 < n; ++i) {
    const Point a = out.back();
    const Point& b = poly[i];
    const Point& c = poly[i + 1];
    const Point& d = poly[(i + 2) % n];
    const Point r{b.x - a.x, b.y - a.y};
    const Point s{d.x - c.x, d.y - c.y};
    const double denom = r.x * s.y - r.y * s.x;
    if (denom > 0.0 && out.size() + (n - i - 2) + 1 >= 4) {
      const double t = ((c.x - a.x) * s.y - (c.y - a.y) * s.x) / denom;
      const double u = ((c.x - a.x) * r.y - (c.y - a.y) * r.x) / denom;
      const Point q{a.x + t * r.x, a.y + t * r.y};
      const double len = std::hypot(c.x - b.x, c.y - b.y);
      const double h = len > 0.0 ? -cross(b, c, q) / len : 0.0;
      if (t >= 1.0 && u <= 0.0 && h >= 0.0 && h < kCompactEps && spent + h <= kCompactBudget) {
        spent += h;
        out.push_back(q);
        ++i;
        continue;
      }
    }
    out.push_back(b);
  }
  for (; i < n; ++i) out.push_back(poly[i]);
  poly.swap(out);
}

// Hull of the image of `poly` under (x, y) -> (y, 2y - x + slack) together
// with the image pushed down to y = -1. The map keeps orientation, so the
// image is still a counter-clockwise convex polygon and the hull is its upper
// chain closed by two corners at y = -1.
Polygon extend_down(const Polygon& poly) {
  const std::size_t n = poly.size();
  Polygon image(n);
  for (std::size_t i = 0; i < n; ++i) {
    image[i] = {poly[i].y, 2.0 * poly[i].y - poly[i].x + ShapeRegion::kShapeSlack};
  }
  if (n <= 2) {
    for (std::size_t i = 0; i < n; ++i) image.push_back({image[i].x, -1.0});
    return convex_hull(std::move(image));
  }
  auto right_of = [](const Point& a, const Point& b) {
    return a.x > b.x || (a.x == b.x && a.y > b.y);
  };
  auto left_of = [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y > b.y);
  };
  std::size_t right = 0;
  std::size_t left = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (right_of(image[i], image[right])) right = i;
    if (left_of(image[i], image[left])) left = i;
  }
  Polygon out;
  out.reserve(n + 2);
  out.push_back({image[left].x, -1.0});
  out.push_back({image[right].x, -1.0});
  for (std::size_t i = right;; i = (i + 1) % n) {
    out.push_back(image[i]);
    if (i == left) break;
  }
  dedupe(out);
  return out;
}

enum class Snap { none, y };

// Keeps the part of `poly` with a*x + b*y <= c (points within kClipEps count as inside).
Polygon clip(const Polygon& poly, double a, double b, double c, Snap snap) {
  Polygon out;
  if (poly.empty()) return out;
  out.reserve(poly.size() + 2);
  auto excess = [&](const Point& p) { return a * p.x + b * p.y - c; };
  auto crossing = [&](const Point& s, const Point& e, double fs, double fe) {
    const double t = fs / (fs - fe);
    Point p{s.x + t * (e.x - s.x), s.y + t * (e.y - s.y)};
    if (snap == Snap::y) p.y = c / b;
    return p;
  };
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& s = poly[(i + n - 1) % n];
    const Point& e = poly[i];
    const double fs = excess(s);
    const double fe = excess(e);
    const bool s_in = fs <= kClipEps;
    const bool e_in = fe <= kClipEps;
    if (e_in) {
      if (!s_in) out.push_back(crossing(s, e, fs, fe));
      out.push_back(e);
    } else if (s_in) {
      out.push_back(crossing(s, e, fs, fe));
    }
  }
  dedupe(out);
  return out;
}

// Smallest x on the horizontal slice of `poly` at height y (y clamped into range).
double slice_min_x(const Polygon& poly, double y) {
  double y_lo = poly.front().y;
  double y_hi = poly.front().y;
  for (const Point& p : poly) {
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  y = std::clamp(y, y_lo, y_hi);
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    if ((a.y - y) * (b.y - y) > 0.0) continue;
    if (a.y == b.y) {
      best = std::min({best, a.x, b.x});
    } else {
      best = std::min(best, a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
    }
  }
  return best;
}

}  // namespace

double capped_sum_any_slope(double base, double slope, std::size_t steps) {
  const Uncapped u = uncapped_terms(base, slope, steps);
  return u.count * base + u.sum_k * slope + (static_cast<double>(steps) - u.count);
}

bool ShapeRegion::push(double lower, double upper) {
  lower = std::clamp(lower, 0.0, 1.0);
  upper = std::clamp(upper, 0.0, 1.0);
  const std::size_t index = count_++;
  if (!feasible_) return false;
  if (lower > upper) {
    if (lower - upper > kClipEps) {
      feasible_ = false;
      polygon_.clear();
      return false;
    }
    upper = lower;
  }

  if (index == 0) {
    first_lo_ = lower;
    first_hi_ = upper;
    return true;
  }

  Polygon next;
  if (index == 1) {
    next = convex_hull({{first_lo_, lower}, {first_hi_, lower}, {first_hi_, upper}, {first_lo_, upper}});
  } else {
    next = extend_down(polygon_);
    next = clip(next, 0.0, 1.0, upper, Snap::y);
    next = clip(next, 0.0, -1.0, -lower, Snap::y);
  }
  next = clip(next, 1.0, -1.0, kShapeSlack, Snap::none);
  if (!keep_history_ && next.size() > kCompactAbove) compact(next);

  polygon_ = std::move(next);
  if (polygon_.empty()) {
    feasible_ = false;
    history_.clear();
    return false;
  }
  if (keep_history_) history_.push_back(polygon_);
  return true;
}

ShapeRegion::Point ShapeRegion::best_pair(std::size_t future_steps, double* value) const {
  auto objective = [&](double b, double s) { return capped_sum_any_slope(b, s, future_steps); };

  Point best = polygon_.front();
  double best_value = -std::numeric_limits<double>::infinity();
  for (const Point& p : polygon_) {
    const double v = objective(p.y, p.y - p.x);
    if (v > best_value) {
      best_value = v;
      best = p;
    }
  }

  const std::size_t n = polygon_.size();
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = polygon_[i];
      const Point& b = polygon_[(i + 1) % n];
      const double sa = a.y - a.x;
      const double sb = b.y - b.x;
      const double d_level = b.y - a.y;
      const double d_slope = sb - sa;
      // objective is nondecreasing in both level and slope, so an edge along
      // which both move the same way peaks at an endpoint
      if (d_level * d_slope >= 0.0) continue;
      if (objective(std::max(a.y, b.y), std::max(sa, sb)) <= best_value) continue;

      auto rises = [&](double lambda) {
        const Uncapped u = uncapped_terms(a.y + lambda * d_level, sa + lambda * d_slope,
                                          future_steps);
        return u.count * d_level + u.sum_k * d_slope > 0.0;
      };
      // concave along the edge: bisect for where the directional derivative turns
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rises(mid)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      for (double lambda : {lo, hi}) {
        const Point p{a.x + lambda * (b.x - a.x), a.y + lambda * d_level};
        const double v = objective(p.y, p.y - p.x);
        if (v > best_value) {
          best_value = v;
          best = p;
        }
      }
    }
  }
  if (value != nullptr) *value = best_value;
  return best;
}

double ShapeRegion::best_future_sum(std::size_t future_steps) const {
  if (!feasible_) throw std::logic_error("best_future_sum on an infeasible region");
  if (future_steps == 0) return 0.0;
  if (count_ < 2) return static_cast<double>(future_steps);
  double value = 0.0;
  best_pair(future_steps, &value);
  return value;
}

StarOutcome ShapeRegion::solve(std::size_t future_steps) const {
  if (!keep_history_) throw std::logic_error("ShapeRegion::solve needs keep_history");
  if (count_ == 0) throw std::invalid_argument("program needs at least one interval");
  if (!feasible_) return StarOutcome::infeasible();

  StarOutcome out;
  out.feasible = true;
  out.witness.assign(count_ + future_steps, 1.0);
  if (count_ == 1) {
    out.witness[0] = first_lo_;
    out.objective = static_cast<double>(future_steps);
    return out;
  }

  double value = 0.0;
  const Point pair = future_steps == 0 ? polygon_.front() : best_pair(future_steps, &value);
  auto& v = out.witness;
  const std::size_t n = count_;
  v[n - 1] = pair.y;
  v[n - 2] = pair.x;
  // walk back: v_{j-1} is the smallest predecessor of v_j, which leaves the
  // most room for the concavity row at j+1
  for (std::size_t j = n - 2; j >= 1; --j) {
    v[j - 1] = slice_min_x(history_[j - 1], v[j]);
  }
  const double slope = v[n - 1] - v[n - 2];
  for (std::size_t k = 1; k <= future_steps; ++k) {
    v[n - 1 + k] = std::min(1.0, v[n - 1] + static_cast<double>(k) * slope);
  }
  out.objective = future_steps == 0 ? 0.0 : value;
  return out;
}

StarOutcome solve_star(const StarProblem& problem) {
  if (problem.band.empty()) throw std::invalid_argument("program needs at least one interval");
  ShapeRegion region(true);
  for (std::size_t j = 0; j < problem.band.size(); ++j) {
    if (!region.push(problem.band.lower[j], problem.band.upper[j])) {
      return StarOutcome::infeasible();
    }
  }
  return region.solve(problem.future_steps);
}

LinearProgram star_program(const StarProblem& problem) {
  const std::size_t n = problem.band.size();
  const std::size_t total = n + problem.future_steps;
  LinearProgram lp;
  for (std::size_t j = 0; j < total; ++j) {
    if (j < n) {
      lp.add_variable(std::max(0.0, problem.band.lower[j]), std::min(1.0, problem.band.upper[j]),
                      0.0);
    } else {
      lp.add_variable(0.0, 1.0, 1.0);
    }
  }
  for (std::size_t j = 0; j + 1 < total; ++j) lp.add_row({{j, 1.0}, {j + 1, -1.0}}, 0.0);
  for (std::size_t j = 2; j < total; ++j) {
    lp.add_row({{j, 1.0}, {j - 1, -2.0}, {j - 2, 1.0}}, 0.0);
  }
  return lp;
}

StarOutcome solve_star_lp(const StarProblem& problem) {
  if (problem.band.empty()) throw std::invalid_argument("program needs at least one interval");
  const LinearProgram lp = star_program(problem);
  LpOptions options;
  options.feasibility_tol = kStarTolerance;
  const LpSolution sol = solve_lp(lp, options);
  if (sol.status != LpStatus::optimal) return StarOutcome::infeasible();
  StarOutcome out;
  out.feasible = true;
  out.objective = sol.objective;
  out.witness = sol.x;
  return out;
}

double star_violation(const StarProblem& problem, std::span<const double> witness) {
  const std::size_t n = problem.band.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < witness.size(); ++j) {
    worst = std::max({worst, -witness[j], witness[j] - 1.0});
    if (j < n) {
      worst = std::max({worst, problem.band.lower[j] - witness[j],
                        witness[j] - problem.band.upper[j]});
    }
    if (j + 1 < witness.size()) worst = std::max(worst, witness[j] - witness[j + 1]);
    if (j >= 2) worst = std::max(worst, witness[j] - 2.0 * witness[j - 1] + witness[j - 2]);
  }
  return worst;
}

double noisy_optimistic_reward(const ConfidenceBand& band, std::size_t t, std::size_t horizon) {
  if (band.empty()) throw std::invalid_argument("optimistic reward needs a nonempty band");
  if (t >= horizon) return 0.0;
  const std::size_t remaining = horizon - t;
  const StarOutcome outcome = solve_star({band, remaining});
  if (outcome.feasible) return outcome.objective;
  return band.upper.back() * static_cast<double>(remaining);
}

}  // namespace peakbandit
