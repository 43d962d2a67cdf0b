#include "doctest.h"

#include <cmath>
#include <numeric>

#include "peakbandit/core.hpp"
#include "random_curves.hpp"

using namespace peakbandit;

namespace {

// Pulls a fixed arm sequence, cycling.
class Scripted final : public Algorithm {
 public:
  explicit Scripted(std::vector<std::size_t> arms) : arms_(std::move(arms)) {}
  std::string name() const override { return "scripted"; }
  void start(std::size_t, std::size_t) override { seen_.clear(); }
  std::size_t select(std::size_t t) override { return arms_[(t - 1) % arms_.size()]; }
  void observe(std::size_t arm, double reward, std::size_t) override {
    seen_.push_back({arm, reward});
  }
  std::vector<std::pair<std::size_t, double>> seen_;

 private:
  std::vector<std::size_t> arms_;
};

BanditInstance two_arm_table() {
  BanditInstance inst;
  inst.arms.emplace_back(std::vector<double>{0.5, 0.1, 0.1}, ShapeTag::single_peaked);
  inst.arms.emplace_back(std::vector<double>{0.3, 0.3, 0.3}, ShapeTag::constant);
  inst.noise = NoiseModel::none();
  return inst;
}

}  // namespace

TEST_CASE("evaluate_curve examples") {
  const RewardCurve constant(std::vector<double>(10, 0.5), ShapeTag::constant);
  CHECK(evaluate_curve(constant, 7) == 0.5);

  std::vector<double> sat(10);
  for (std::size_t m = 1; m <= sat.size(); ++m) sat[m - 1] = 1.0 - std::pow(double(m), -0.5);
  const RewardCurve curve(sat, ShapeTag::increasing_concave);
  CHECK(evaluate_curve(curve, 4) == doctest::Approx(1.0 - 1.0 / std::sqrt(4.0)).epsilon(1e-15));
  CHECK_THROWS_AS(evaluate_curve(curve, 11), std::out_of_range);
  CHECK_THROWS_AS(evaluate_curve(curve, 0), std::out_of_range);
}

TEST_CASE("curve construction rejects bad values and shapes") {
  CHECK_THROWS_AS(RewardCurve({0.5, 1.2}, ShapeTag::unvalidated), std::invalid_argument);
  CHECK_THROWS_AS(RewardCurve({-0.1}, ShapeTag::unvalidated), std::invalid_argument);
  CHECK_THROWS_AS(RewardCurve({}, ShapeTag::unvalidated), std::invalid_argument);
  CHECK_THROWS_AS(RewardCurve({0.1, 0.5, 0.6}, ShapeTag::decreasing), std::invalid_argument);
  CHECK_THROWS_AS(RewardCurve({0.5, 0.2, 0.6}, ShapeTag::single_peaked), std::invalid_argument);
  const RewardCurve c({0.1, 0.2, 0.3}, ShapeTag::increasing_concave);
  CHECK(c.tail() == 0.3);
  CHECK(c.cumulative(0) == 0.0);
  CHECK(c.cumulative(3) == doctest::Approx(0.6));
}

TEST_CASE("shape validation") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto inc = testing::random_increasing_concave(rng, 40);
    const auto dec = testing::random_decreasing(rng, 40);
    CHECK(satisfies_shape(inc, ShapeTag::single_peaked));
    CHECK(satisfies_shape(dec, ShapeTag::single_peaked));
    CHECK(satisfies_shape(testing::random_single_peaked(rng, 40), ShapeTag::single_peaked));
  }
  // strict interior local minimum
  CHECK_FALSE(satisfies_shape(std::vector<double>{0.6, 0.4, 0.5, 0.3}, ShapeTag::single_peaked));
  // convex rise
  CHECK_FALSE(satisfies_shape(std::vector<double>{0.1, 0.2, 0.4, 0.3}, ShapeTag::single_peaked));
  CHECK(tipping_point(std::vector<double>{0.1, 0.3, 0.4, 0.2}) == std::optional<std::size_t>(3));
  CHECK(tipping_point(std::vector<double>{0.9, 0.3}) == std::optional<std::size_t>(1));
  CHECK(classify_shape(std::vector<double>{0.2, 0.2}) == ShapeTag::constant);
  CHECK(classify_shape(std::vector<double>{0.2, 0.1}) == ShapeTag::decreasing);
  CHECK(classify_shape(std::vector<double>{0.1, 0.3, 0.4}) == ShapeTag::increasing_concave);
  CHECK(classify_shape(std::vector<double>{0.1, 0.3, 0.2}) == ShapeTag::single_peaked);
  CHECK(classify_shape(std::vector<double>{0.1, 0.2, 0.4}) == ShapeTag::unvalidated);
}

TEST_CASE("cumulative_reward examples") {
  const BanditInstance inst = two_arm_table();
  const std::vector<std::size_t> a{3, 0};
  const std::vector<std::size_t> b{1, 2};
  CHECK(cumulative_reward(a, inst) == doctest::Approx(0.5 + 0.1 + 0.1).epsilon(1e-15));
  CHECK(cumulative_reward(b, inst) == doctest::Approx(0.5 + 0.3 + 0.3).epsilon(1e-15));
  CHECK(cumulative_reward(RunTrace{}, inst) == 0.0);
}

TEST_CASE("simulate_run contract") {
  BanditInstance single;
  single.arms.emplace_back(std::vector<double>(8, 0.4), ShapeTag::constant);
  Scripted only({0});
  CHECK(simulate_run(single, only, 5, 1).pull_counts == std::vector<std::size_t>{5});

  BanditInstance inst = two_arm_table();
  Scripted alt({1, 0, 1});
  const RunTrace trace = simulate_run(inst, alt, 3, 7);
  REQUIRE(trace.steps.size() == 3);
  for (const Step& s : trace.steps) CHECK(s.observed == s.true_reward);
  CHECK(trace.steps[1].true_reward == 0.5);
  CHECK(trace.pull_counts == std::vector<std::size_t>{1, 2});
  CHECK_THROWS_AS(simulate_run(inst, alt, 4, 7), std::invalid_argument);

  inst.noise = NoiseModel::gaussian({0.1});
  Scripted a({0, 1, 1}), b({0, 1, 1});
  CHECK(simulate_run(inst, a, 3, 42) == simulate_run(inst, b, 3, 42));
  CHECK_FALSE(simulate_run(inst, a, 3, 42) == simulate_run(inst, b, 3, 43));
  // the algorithm sees the noisy value, the trace keeps the truth
  const RunTrace noisy = simulate_run(inst, a, 3, 5);
  CHECK(a.seen_[0].second == noisy.steps[0].observed);
  CHECK(noisy.steps[0].true_reward == 0.5);
}

TEST_CASE("trace validity and order independence") {
  Rng rng(3);
  BanditInstance inst;
  for (int i = 0; i < 3; ++i) {
    inst.arms.emplace_back(testing::random_single_peaked(rng, 30), ShapeTag::single_peaked);
  }
  inst.noise = NoiseModel::bounded_uniform({0.05});
  Scripted s1({0, 1, 2, 2, 1}), s2({2, 2, 1, 1, 0});
  const RunTrace t1 = simulate_run(inst, s1, 25, 9);
  const RunTrace t2 = simulate_run(inst, s2, 25, 9);
  std::vector<std::size_t> seen(3, 0);
  for (const Step& s : t1.steps) {
    CHECK(s.true_reward == inst.arms[s.arm].at(++seen[s.arm]));
    CHECK(std::abs(s.observed - s.true_reward) <= 0.05);
  }
  CHECK(t1.pull_counts == t2.pull_counts);
  CHECK(cumulative_reward(t1, inst) == cumulative_reward(t2, inst));
  const double r = cumulative_reward(t1, inst);
  CHECK(r >= 0.0);
  CHECK(r <= 25.0);
}

TEST_CASE("sample_observation") {
  Rng rng(5);
  CHECK(sample_observation(0.3, NoiseModel::none(), 0, rng) == 0.3);
  const NoiseModel bounded = NoiseModel::bounded_uniform({0.2});
  for (int i = 0; i < 1000; ++i) {
    CHECK(std::abs(sample_observation(0.5, bounded, 0, rng) - 0.5) <= 0.2);
  }
  const double sigma = 0.3;
  const NoiseModel gauss = NoiseModel::gaussian({sigma});
  const int draws = 100000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) sum += sample_observation(0.4, gauss, 0, rng);
  CHECK(std::abs(sum / draws - 0.4) <= 5.0 * sigma / std::sqrt(double(draws)));
}

TEST_CASE("seed hashing is stable and order sensitive") {
  const auto a = SeedHasher().add("exp").add("spo").add(std::uint64_t{100}).finish();
  const auto b = SeedHasher().add("exp").add("spo").add(std::uint64_t{100}).finish();
  const auto c = SeedHasher().add("spo").add("exp").add(std::uint64_t{100}).finish();
  const auto d = SeedHasher().add("exps").add("po").add(std::uint64_t{100}).finish();
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a != d);
}

TEST_CASE("argmax_lowest") {
  CHECK(argmax_lowest(std::vector<double>{1.5, 2.8}) == 1);
  CHECK(argmax_lowest(std::vector<double>{2.0, 2.0}) == 0);
  CHECK(argmax_lowest(std::vector<double>{0.1, 0.9, 0.9}) == 1);
}
