#include "doctest.h"

#include <cmath>

#include "peakbandit/oracle.hpp"
#include "random_curves.hpp"

using namespace peakbandit;
using namespace peakbandit::testing;

namespace {

BanditInstance curves_instance(std::vector<std::vector<double>> values) {
  BanditInstance inst;
  for (auto& v : values) inst.arms.push_back(RewardCurve::classified(std::move(v)));
  return inst;
}

const BanditInstance& example() {
  static const BanditInstance inst = curves_instance({{0.5, 0.1, 0.1}, {0.3, 0.3, 0.3}});
  return inst;
}

RunTrace trace_of(const std::vector<std::size_t>& arms, std::size_t num_arms) {
  RunTrace trace;
  trace.pull_counts.assign(num_arms, 0);
  for (std::size_t t = 0; t < arms.size(); ++t) {
    trace.steps.push_back({t + 1, arms[t], 0.0, 0.0});
    ++trace.pull_counts[arms[t]];
  }
  return trace;
}

// Exhaustive search written independently of the library: maximizes the value
// and keeps the first allocation met in reversed-lexicographic order.
AllocationResult enumerate(const std::vector<std::vector<double>>& f, std::size_t horizon) {
  const std::size_t n = f.size();
  auto value = [&](const std::vector<std::size_t>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t m = 0; m < c[i]; ++m) s += f[i][m];
    }
    return s;
  };
  AllocationResult best{{}, -1.0};
  std::vector<std::size_t> c(n, 0);
  // iterate the last arm's count upward in the outermost loop
  auto rec = [&](auto&& self, std::size_t arm, std::size_t left) -> void {
    if (arm == 0) {
      c[0] = left;
      const double v = value(c);
      if (best.counts.empty() || v > best.value + 1e-12) best = {c, v};
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      c[arm] = k;
      self(self, arm - 1, left - k);
    }
  };
  rec(rec, n - 1, horizon);
  return best;
}

}  // namespace

TEST_CASE("dp examples") {
  const AllocationResult r = optimal_allocation_dp(example(), 3);
  CHECK(r.counts == std::vector<std::size_t>{1, 2});
  CHECK(r.value == doctest::Approx(1.1));

  const BanditInstance single = curves_instance({{0.1, 0.2, 0.3, 0.4, 0.5}});
  const AllocationResult s = optimal_allocation_dp(single, 5);
  CHECK(s.counts == std::vector<std::size_t>{5});
  CHECK(s.value == doctest::Approx(1.5));

  const BanditInstance twins = curves_instance({{0.4, 0.4, 0.4, 0.4}, {0.4, 0.4, 0.4, 0.4}});
  const AllocationResult t = optimal_allocation_dp(twins, 4);
  CHECK(t.value == doctest::Approx(1.6));
  CHECK(t.counts == std::vector<std::size_t>{4, 0});

  CHECK(optimal_allocation_dp(example(), 0).counts == std::vector<std::size_t>{0, 0});
  CHECK_THROWS_AS(optimal_allocation_dp(example(), 4), std::invalid_argument);
}

TEST_CASE("brute force examples") {
  CHECK(brute_force_allocation(example(), 3) == optimal_allocation_dp(example(), 3));
  const AllocationResult zero = brute_force_allocation(example(), 0);
  CHECK(zero.counts == std::vector<std::size_t>{0, 0});
  CHECK(zero.value == 0.0);
  CHECK(brute_force_allocation(example(), 1).counts == std::vector<std::size_t>{1, 0});
  const BanditInstance flipped = curves_instance({{0.2, 0.1}, {0.3, 0.3}});
  CHECK(brute_force_allocation(flipped, 1).counts == std::vector<std::size_t>{0, 1});

  const BanditInstance five = curves_instance(std::vector<std::vector<double>>(5, {0.1}));
  CHECK_THROWS_AS(brute_force_allocation(five, 1), std::length_error);
  const BanditInstance wide = curves_instance({std::vector<double>(20, 0.1)});
  CHECK_THROWS_AS(brute_force_allocation(wide, 15), std::length_error);
}

TEST_CASE("dp agrees with exhaustive enumeration including ties") {
  Rng rng(2024);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = uniform_index(rng, 1, 3);
    const std::size_t horizon = uniform_index(rng, 0, 12);
    const bool coarse = rep % 2 == 0;
    std::vector<std::vector<double>> f(n, std::vector<double>(12));
    for (auto& arm : f) {
      for (double& x : arm) {
        // coarse grids make exact ties common
        x = coarse ? 0.25 * double(uniform_index(rng, 0, 4)) : uniform(rng, 0.0, 1.0);
      }
    }
    const BanditInstance inst = curves_instance(f);
    const AllocationResult dp = optimal_allocation_dp(inst, horizon);
    const AllocationResult bf = brute_force_allocation(inst, horizon);
    const AllocationResult ref = enumerate(f, horizon);
    REQUIRE(dp.counts == bf.counts);
    REQUIRE(dp.value == bf.value);
    REQUIRE(dp.counts == ref.counts);
    REQUIRE(dp.value == doctest::Approx(ref.value).epsilon(1e-12));
  }
}

TEST_CASE("table answers every budget like a fresh dp") {
  Rng rng(9);
  std::vector<std::vector<double>> f;
  for (int i = 0; i < 3; ++i) f.push_back(random_single_peaked(rng, 80));
  const BanditInstance inst = curves_instance(f);
  const OptimalAllocationTable table(inst, 80);
  double last = 0.0;
  for (std::size_t b = 0; b <= 80; ++b) {
    const AllocationResult a = table.at(b);
    CHECK(a == optimal_allocation_dp(inst, b));
    std::size_t sum = 0;
    for (std::size_t c : a.counts) sum += c;
    CHECK(sum == b);
    CHECK(a.value >= last - 1e-12);
    last = a.value;
  }
  CHECK_THROWS_AS(table.at(81), std::out_of_range);
}

TEST_CASE("policy regret examples") {
  CHECK(policy_regret(example(), trace_of({0, 1, 1}, 2), 3) == doctest::Approx(0.0));
  CHECK(policy_regret(example(), trace_of({0, 0, 0}, 2), 3) == doctest::Approx(0.4));
  const OptimalAllocationTable table(example(), 3);
  CHECK(policy_regret(table, example(), trace_of({1, 1, 1}, 2)) == doctest::Approx(0.2));
  for (auto arms : {std::vector<std::size_t>{0, 0, 0}, {1, 0, 1}, {1, 1, 1}}) {
    const double per_step = policy_regret(example(), trace_of(arms, 2), 3) / 3.0;
    CHECK(per_step >= 0.0);
    CHECK(per_step <= 1.0);
  }
}

TEST_CASE("optimal pull fraction") {
  const std::vector<std::size_t> hs{1, 2, 3};
  const auto frac = optimal_pull_fraction(example(), 0, hs);
  CHECK(frac[2] == doctest::Approx(1.0 / 3.0));
  CHECK(frac[0] == 1.0);

  const BanditInstance single = curves_instance({{0.3, 0.2, 0.1, 0.0}});
  for (double x : optimal_pull_fraction(single, 0, std::vector<std::size_t>{1, 2, 4})) {
    CHECK(x == 1.0);
  }
  const BanditInstance twins = curves_instance({{0.4, 0.4, 0.4, 0.4}, {0.4, 0.4, 0.4, 0.4}});
  for (double x : optimal_pull_fraction(twins, 1, std::vector<std::size_t>{1, 2, 3, 4})) {
    CHECK(x == 0.0);
  }
}

TEST_CASE("optimal policy replays the allocation with zero regret") {
  Rng rng(31);
  std::vector<std::vector<double>> f;
  for (int i = 0; i < 3; ++i) f.push_back(random_single_peaked(rng, 200));
  const BanditInstance inst = curves_instance(f);
  auto table = std::make_shared<const OptimalAllocationTable>(inst, 200);
  for (std::size_t h : {1, 17, 100, 200}) {
    OptimalPolicy policy(table);
    const RunTrace trace = simulate_run(inst, policy, h, 0);
    CHECK(trace.pull_counts == table->at(h).counts);
    CHECK(policy_regret(*table, inst, trace) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("best single arm approaches the optimum per step") {
  // two arms with different asymptotes: committing to one arm is nearly optimal for long T
  std::vector<double> a(4000), b(4000);
  for (std::size_t m = 0; m < 4000; ++m) {
    const double t = double(m + 1);
    a[m] = std::min(1.0, t / 100.0) * (0.3 + 0.6 * std::exp(-t / 400.0));
    b[m] = 0.5 - 0.45 * std::exp(-t / 50.0);
  }
  const BanditInstance inst = curves_instance({a, b});
  const OptimalAllocationTable table(inst, 4000);
  double previous = 1.0;
  for (std::size_t h : {1000, 2000, 3000, 4000}) {
    const double single = std::max(inst.arms[0].cumulative(h), inst.arms[1].cumulative(h));
    const double gap = (table.at(h).value - single) / double(h);
    CHECK(gap >= -1e-12);
    CHECK(gap <= previous + 1e-12);
    previous = gap;
  }
  CHECK(previous < 0.01);
}
