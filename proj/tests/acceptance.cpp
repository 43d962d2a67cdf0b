// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "peakbandit/harness.hpp"
#include "peakbandit/optimism_lp.hpp"
#include "peakbandit/spo.hpp"
#include "random_curves.hpp"

using namespace peakbandit;
using namespace peakbandit::testing;

namespace {

// pinned tolerances and budgets
constexpr double kWitnessTol = 1e-9;
constexpr double kZeroNoiseTol = 1e-9;
constexpr double kSoundnessSlack = 1e-9;
constexpr double kClosedFormRelTol = 1e-12;
constexpr double kDeltaTol = 1e-12;
constexpr double kFractionTol = 0.05;
constexpr double kJitter = 0.10;
constexpr double kShapeTol = kShapeTolerance;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

BanditInstance curves_instance(std::vector<std::vector<double>> values) {
  BanditInstance inst;
  for (auto& v : values) inst.arms.push_back(RewardCurve::classified(std::move(v)));
  return inst;
}

double at_horizon(const ExperimentResult& r, const std::string& alg, std::size_t horizon) {
  for (const AggregateRow& a : r.aggregates) {
    if (a.algorithm == alg && a.horizon == horizon) return a.mean_per_step_regret;
  }
  throw std::runtime_error("no aggregate for " + alg);
}

std::vector<double> series(const ExperimentResult& r, const std::string& alg) {
  std::vector<double> out;
  for (std::size_t h : r.horizons) out.push_back(at_horizon(r, alg, h));
  return out;
}

double fraction_at(const ExperimentResult& r, const std::string& alg, std::size_t horizon) {
  for (const AggregateRow& a : r.aggregates) {
    if (a.algorithm == alg && a.horizon == horizon) return a.mean_pull_fraction;
  }
  throw std::runtime_error("no aggregate for " + alg);
}

Outcome decreasing_equivalence() {
  Rng rng(101);
  std::size_t steps = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = uniform_index(rng, 1, 5);
    const std::size_t horizon = uniform_index(rng, 2 * n * spo_init_length(2000), 2000);
    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < n; ++i) values.push_back(random_decreasing(rng, horizon));
    const BanditInstance inst = curves_instance(values);
    Spo spo(NoiseModel::none());
    const RunTrace trace = simulate_run(inst, spo, horizon, 0);
    Greedy greedy;
    greedy.start(n, horizon);
    const std::size_t warm = n * spo_init_length(horizon);
    for (const Step& s : trace.steps) {
      if (s.t > warm) {
        if (greedy.select(s.t) != s.arm) {
          return {false, fmt("instance %d diverges at t=%zu", rep, s.t)};
        }
        ++steps;
      }
      greedy.observe(s.arm, s.observed, s.t);
    }
  }
  return {true, fmt("50 instances, %zu post-warm-up steps identical", steps)};
}

Outcome lp_soundness() {
  Rng rng(202);
  double worst_gap = 0.0, worst_violation = 0.0, worst_zero = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = uniform_index(rng, 1, 30);
    const std::size_t k = uniform_index(rng, 0, 50);
    const auto truth = random_increasing_concave(rng, n + k);
    const double eps = uniform(rng, 0.0, 0.1);
    ConfidenceBand band;
    for (std::size_t j = 0; j < n; ++j) {
      const double obs = truth[j] + uniform(rng, -eps, eps);
      band.push(obs - eps, obs + eps);
    }
    const StarProblem problem{band, k};
    const StarOutcome out = solve_star(problem);
    if (!out.feasible) return {false, fmt("case %d infeasible although the truth fits", rep)};
    double future = 0.0;
    for (std::size_t j = n; j < n + k; ++j) future += truth[j];
    worst_gap = std::min(worst_gap, out.objective - future);
    worst_violation = std::max(worst_violation, star_violation(problem, out.witness));
    if (n >= 2) {
      ConfidenceBand exact;
      for (std::size_t j = 0; j < n; ++j) exact.push(truth[j], truth[j]);
      const StarOutcome z = solve_star({exact, k});
      if (!z.feasible) return {false, fmt("case %d zero-width band infeasible", rep)};
      const double closed = capped_linear_sum(truth[n - 1], truth[n - 1] - truth[n - 2], k);
      worst_zero = std::max(worst_zero, std::abs(z.objective - closed));
    }
  }
  const bool pass = worst_gap >= -kSoundnessSlack && worst_violation <= kWitnessTol &&
                    worst_zero <= kZeroNoiseTol;
  return {pass, fmt("min(V*-truth)=%.3g, max violation=%.3g, zero-width error=%.3g", worst_gap,
                    worst_violation, worst_zero)};
}

Outcome closed_form() {
  Rng rng(303);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const double base = uniform(rng, 0.0, 1.0);
    const double slope = rep % 4 == 0 ? 0.0 : std::pow(10.0, uniform(rng, -7.0, 0.0));
    const std::size_t k = uniform_index(rng, 0, 10000);
    long double direct = 0.0L;
    for (std::size_t i = 1; i <= k; ++i) {
      direct += std::min(1.0L, static_cast<long double>(base) +
                                   static_cast<long double>(slope) * static_cast<long double>(i));
    }
    const double err = std::abs(capped_linear_sum(base, slope, k) - static_cast<double>(direct)) /
                       std::max(1.0, static_cast<double>(direct));
    worst = std::max(worst, err);
  }
  return {worst <= kClosedFormRelTol, fmt("max relative error %.3g", worst)};
}

Outcome oracle_exactness() {
  Rng rng(404);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = uniform_index(rng, 1, 3);
    const std::size_t horizon = uniform_index(rng, 0, 12);
    std::vector<std::vector<double>> f(n, std::vector<double>(12));
    for (auto& arm : f) {
      for (double& x : arm) {
        x = rep % 2 ? uniform(rng, 0.0, 1.0) : 0.25 * double(uniform_index(rng, 0, 4));
      }
    }
    const BanditInstance inst = curves_instance(f);
    const AllocationResult dp = optimal_allocation_dp(inst, horizon);
    const AllocationResult bf = brute_force_allocation(inst, horizon);
    if (!(dp == bf)) return {false, fmt("instance %d differs", rep)};
  }
  return {true, "100 instances: identical values and counts"};
}

Outcome delta_schedule() {
  double worst = -1.0;
  std::size_t checked = 0;
  for (double eps : {0.01, 0.1, 0.5}) {
    for (int e = 0; e <= 80; ++e) {
      const auto horizon = static_cast<std::size_t>(std::llround(std::pow(10.0, e / 20.0)));
      const double delta = delta_for_horizon(eps, horizon);
      const double joint = -std::expm1(static_cast<double>(horizon) * std::log1p(-delta));
      worst = std::max(worst, joint - eps);
      ++checked;
    }
  }
  return {worst <= kDeltaTol, fmt("%zu pairs, max(1-(1-d)^T - eps) = %.3g", checked, worst)};
}

Outcome optimism_soundness() {
  Rng rng(606);
  std::size_t checks = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t length = uniform_index(rng, 3, 120);
    const auto f = random_single_peaked(rng, length);
    std::vector<double> prefix(length + 1, 0.0);
    for (std::size_t m = 0; m < length; ++m) prefix[m + 1] = prefix[m] + f[m];
    for (std::size_t n = 2; n < length; ++n) {
      for (std::size_t k = 1; n + k <= length; ++k) {
        // t pulls made so far stand in for n; T - t = K remaining
        const double bound = optimistic_future_reward(f[n - 1], f[n - 2], n, n + k);
        const double truth = prefix[n + k] - prefix[n];
        worst = std::min(worst, bound - truth);
        ++checks;
      }
    }
  }
  return {worst >= -kSoundnessSlack, fmt("%zu (n,K) pairs, min(bound-truth) = %.3g", checks, worst)};
}

Json base_config(const std::string& id, Json instance, Json noise,
                 std::vector<std::string> algorithms, std::size_t max_horizon) {
  Json c;
  c["experiment_id"] = id;
  c["instance"] = std::move(instance);
  c["noise"] = std::move(noise);
  c["algorithms"] = std::move(algorithms);
  c["max_horizon"] = max_horizon;
  c["horizon_points"] = 100;
  c["seeds"] = 30;
  return c;
}

Outcome fig1() {
  const ExperimentConfig config = parse_config(base_config(
      "fig1_inc_dec_1", {{"family", "peak_preset"}, {"preset", "inc_dec_1"}},
      {{"kind", "gaussian"}, {"scale", 0.01}},
      {"spo", "greedy", "one_step_optimistic", "exp3", "rexp3", "ducb", "swucb"}, 20000));
  const ExperimentResult r = run_experiment(config);
  const std::size_t top = r.horizons.back();
  const double spo = at_horizon(r, "spo", top);
  std::string losers;
  for (const char* b : {"greedy", "one_step_optimistic", "exp3", "rexp3", "ducb", "swucb"}) {
    const double v = at_horizon(r, b, top);
    if (!(spo < v)) losers += fmt(" %s=%.3g", b, v);
  }
  const bool a = losers.empty();

  // the grid point closest to T_max/10
  std::size_t tenth = r.horizons.front();
  for (std::size_t h : r.horizons) {
    if (std::llabs(static_cast<long long>(h) - static_cast<long long>(top / 10)) <
        std::llabs(static_cast<long long>(tenth) - static_cast<long long>(top / 10))) {
      tenth = h;
    }
  }
  const double early = at_horizon(r, "spo", tenth);
  const bool b = spo < 0.5 * early;

  const AllocationResult best = r.optimal.back();
  const double optimal_fraction = static_cast<double>(best.counts[0]) / static_cast<double>(top);
  const double fraction = fraction_at(r, "spo", top);
  const bool c = std::abs(fraction - optimal_fraction) <= kFractionTol;

  std::string detail = fmt("(a) %s spo=%.3g%s%s; (b) %s %.3g vs %.3g at T=%zu; (c) %s frac %.4f vs opt %.4f",
                           a ? "ok" : "FAIL", spo, a ? "" : " not below:", losers.c_str(),
                           b ? "ok" : "FAIL", spo, early, tenth, c ? "ok" : "FAIL", fraction,
                           optimal_fraction);
  return {a && b && c, detail};
}

Outcome increasing_trend() {
  std::string detail;
  bool pass = true;
  for (double alpha : {0.1, 1.0}) {
    Json instance = {{"family", "curves"},
                     {"arms",
                      {{{"type", "saturating"}, {"alpha", 0.5}, {"scale", 1.0}},
                       {{"type", "saturating"}, {"alpha", alpha}, {"scale", 0.5}}}}};
    Json c = base_config(fmt("increasing_%g", alpha), instance, {{"kind", "none"}}, {"spo"}, 20000);
    c["seeds"] = 1;  // noise-free runs are deterministic
    const ExperimentResult r = run_experiment(parse_config(c));
    const auto s = series(r, "spo");
    double worst = 0.0;
    for (std::size_t k = 10; k < s.size(); ++k) {
      const double ratio = s[k - 1] > 0.0 ? s[k] / s[k - 1] : (s[k] > 0.0 ? INFINITY : 1.0);
      worst = std::max(worst, ratio);
    }
    const bool ok = worst <= 1.0 + kJitter;
    pass = pass && ok;
    detail += fmt("alpha=%g: max step ratio %.4f, regret/T %.3g -> %.3g; ", alpha, worst, s[10],
                  s.back());
  }
  return {pass, detail};
}

Outcome fico() {
  const std::string path = PEAKBANDIT_DATA_DIR "/fico_synthetic.csv";
  const std::size_t top = 20000;
  const FicoGroupTable table = load_fico_groups(path);
  const BanditInstance sc = build_fico_curves(table, top, FicoModel::score_change, FicoMode::expected);
  const BanditInstance bu = build_fico_curves(table, top, FicoModel::bank_utility, FicoMode::expected);
  bool shapes = true;
  for (const RewardCurve& c : sc.arms) shapes = shapes && satisfies_shape(c.values(), ShapeTag::single_peaked, kShapeTol);
  bool decreasing = true;
  for (const RewardCurve& c : bu.arms) decreasing = decreasing && satisfies_shape(c.values(), ShapeTag::decreasing, kShapeTol);

  Json c = base_config(
      "fico_score_change", {{"family", "fico"}, {"path", path}, {"model", "score_change"}},
      {{"kind", "gaussian"}, {"scale", 0.01}},
      {"spo", "greedy", "one_step_optimistic", "exp3", "rexp3", "ducb", "swucb"}, top);
  c["horizon_points"] = 2;  // only T_max is judged
  const ExperimentConfig config = parse_config(c);
  const ExperimentResult r = run_experiment(config);
  const double spo = at_horizon(r, "spo", top);
  std::string losers;
  for (const char* b : {"greedy", "one_step_optimistic", "exp3", "rexp3", "ducb", "swucb"}) {
    const double v = at_horizon(r, b, top);
    if (!(spo <= v)) losers += fmt(" %s=%.3g", b, v);
  }
  const bool order = losers.empty();
  return {shapes && decreasing && order,
          fmt("score_change single-peaked: %s; bank_utility nonincreasing: %s; spo=%.3g %s%s",
              shapes ? "yes" : "no", decreasing ? "yes" : "no", spo,
              order ? "<= all baselines" : "above:", losers.c_str())};
}

Outcome gaussian() {
  Json c = base_config("gaussian_10_arms", {{"family", "gaussian"}, {"num_arms", 10}, {"means_seed", 1}},
                       {{"kind", "gaussian"}, {"scale", 0.05}}, {"spo", "ucb"}, 20000);
  const ExperimentResult r = run_experiment(parse_config(c));
  const auto s = series(r, "spo");
  const std::size_t q = s.size() / 4;
  double first = 0.0, last = 0.0;
  for (std::size_t k = 0; k < q; ++k) {
    first += s[k] / double(q);
    last += s[s.size() - q + k] / double(q);
  }
  const bool decreasing = last < first;
  const std::size_t median = r.horizons[r.horizons.size() / 2];
  const double ucb = at_horizon(r, "ucb", median);
  const double spo = at_horizon(r, "spo", median);
  return {decreasing && ucb <= spo,
          fmt("spo first-quarter mean %.4g, last-quarter mean %.4g; at T=%zu ucb %.4g vs spo %.4g",
              first, last, median, ucb, spo)};
}

}  // namespace

int main(int argc, char** argv) {
  // criteria listed after --expect-fail must fail; any other failure is an error
  std::set<int> expected_failures;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--expect-fail" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) expected_failures.insert(std::stoi(item));
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"decreasing equivalence", decreasing_equivalence},
      {"LP soundness and tightness", lp_soundness},
      {"closed-form capped sum", closed_form},
      {"oracle exactness", oracle_exactness},
      {"delta schedule", delta_schedule},
      {"optimism soundness", optimism_soundness},
      {"single-peaked sweep (inc_dec_1)", fig1},
      {"increasing-family trend", increasing_trend},
      {"FICO shapes and ordering", fico},
      {"stationary Gaussian sanity", gaussian},
  };
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool expected = expected_failures.count(id) > 0;
    std::printf("[%s] %2d %s (%.1fs): %s%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                secs, o.detail.c_str(), !o.pass && expected ? " [known failure]" : "");
    std::fflush(stdout);
    if (o.pass == expected) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
