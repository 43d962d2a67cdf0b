#include "peakbandit/oracle.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace peakbandit {

OptimalAllocationTable::OptimalAllocationTable(const BanditInstance& instance,
                                               std::size_t max_budget)
    : instance_(instance), num_arms_(instance.num_arms()), max_budget_(max_budget) {
  if (num_arms_ == 0) throw std::invalid_argument("instance has no arms");
  if (max_budget > instance.max_horizon()) {
    throw std::invalid_argument("budget " + std::to_string(max_budget) +
                                " exceeds the shortest curve (" +
                                std::to_string(instance.max_horizon()) + ")");
  }
  if (max_budget > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("budget too large for the allocation table");
  }
  const std::size_t width = max_budget + 1;
  choice_.assign(num_arms_ * width, 0);
  std::vector<double> prev(width), next(width);
  const RewardCurve& first = instance.arms[0];
  for (std::size_t b = 0; b < width; ++b) {
    prev[b] = first.cumulative(b);
    choice_[b] = static_cast<std::uint32_t>(b);
  }
  for (std::size_t i = 1; i < num_arms_; ++i) {
    const RewardCurve& curve = instance.arms[i];
    std::vector<double> gain(width);
    for (std::size_t k = 0; k < width; ++k) gain[k] = curve.cumulative(k);
    std::uint32_t* row = &choice_[i * width];
    for (std::size_t b = 0; b < width; ++b) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k <= b; ++k) best = std::max(best, prev[b - k] + gain[k]);
      std::size_t k = 0;
      while (prev[b - k] + gain[k] < best - kAllocationTieTolerance) ++k;
      row[b] = static_cast<std::uint32_t>(k);
      next[b] = best;
    }
    prev.swap(next);
  }
}

AllocationResult OptimalAllocationTable::at(std::size_t budget) const {
  if (budget > max_budget_) {
    throw std::out_of_range("budget " + std::to_string(budget) + " beyond table size " +
                            std::to_string(max_budget_));
  }
  const std::size_t width = max_budget_ + 1;
  AllocationResult out;
  out.counts.assign(num_arms_, 0);
  std::size_t b = budget;
  for (std::size_t i = num_arms_; i-- > 0;) {
    const std::size_t k = choice_[i * width + b];
    out.counts[i] = k;
    b -= k;
  }
  out.value = cumulative_reward(out.counts, instance_);
  return out;
}

AllocationResult optimal_allocation_dp(const BanditInstance& instance, std::size_t horizon) {
  return OptimalAllocationTable(instance, horizon).at(horizon);
}

AllocationResult brute_force_allocation(const BanditInstance& instance, std::size_t horizon) {
  const std::size_t n = instance.num_arms();
  if (n == 0 || n > 4 || horizon > 14) {
    throw std::length_error("brute force limited to 1..4 arms and horizon <= 14");
  }
  if (horizon > instance.max_horizon()) {
    throw std::invalid_argument("horizon exceeds the shortest curve");
  }
  std::vector<AllocationResult> all;
  std::vector<std::size_t> counts(n, 0);
  auto rec = [&](auto&& self, std::size_t arm, std::size_t left) -> void {
    if (arm + 1 == n) {
      counts[arm] = left;
      all.push_back({counts, cumulative_reward(counts, instance)});
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      counts[arm] = k;
      self(self, arm + 1, left - k);
    }
  };
  rec(rec, 0, horizon);

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : all) best = std::max(best, a.value);
  const AllocationResult* pick = nullptr;
  for (const auto& a : all) {
    if (a.value < best - kAllocationTieTolerance) continue;
    // smallest count on the highest arm, then the next-highest, ...
    if (pick == nullptr || std::lexicographical_compare(a.counts.rbegin(), a.counts.rend(),
                                                        pick->counts.rbegin(),
                                                        pick->counts.rend())) {
      pick = &a;
    }
  }
  return *pick;
}

double policy_regret(const BanditInstance& instance, const RunTrace& trace, std::size_t horizon) {
  return optimal_allocation_dp(instance, horizon).value - cumulative_reward(trace, instance);
}

double policy_regret(const OptimalAllocationTable& table, const BanditInstance& instance,
                     const RunTrace& trace) {
  return table.at(trace.steps.size()).value - cumulative_reward(trace, instance);
}

std::vector<double> optimal_pull_fraction(const BanditInstance& instance, std::size_t arm,
                                          std::span<const std::size_t> horizons) {
  if (arm >= instance.num_arms()) throw std::out_of_range("arm index out of range");
  std::vector<double> out;
  if (horizons.empty()) return out;
  std::size_t top = 0;
  for (std::size_t h : horizons) top = std::max(top, h);
  const OptimalAllocationTable table(instance, top);
  for (std::size_t h : horizons) {
    if (h == 0) throw std::invalid_argument("pull fraction needs positive horizons");
    out.push_back(static_cast<double>(table.at(h).counts[arm]) / static_cast<double>(h));
  }
  return out;
}

void OptimalPolicy::start(std::size_t num_arms, std::size_t horizon) {
  const AllocationResult a = table_->at(horizon);
  if (a.counts.size() != num_arms) throw std::invalid_argument("table built for another instance");
  schedule_.clear();
  for (std::size_t i = 0; i < num_arms; ++i) schedule_.insert(schedule_.end(), a.counts[i], i);
}

std::size_t OptimalPolicy::select(std::size_t t) { return schedule_.at(t - 1); }

}  // namespace peakbandit
