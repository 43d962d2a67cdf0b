#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "peakbandit/core.hpp"

namespace peakbandit {

struct AllocationResult {
  std::vector<std::size_t> counts;
  double value = 0.0;  // sum_i F_i(counts_i)

  bool operator==(const AllocationResult&) const = default;
};

/// Tolerance under which two allocation values count as tied.
inline constexpr double kAllocationTieTolerance = 1e-12;

/// Exact optimal allocations for every budget up to `max_budget`, from one
/// dynamic program D[i][b] = max_k D[i-1][b-k] + F_i(k). Ties go to the
/// smaller count on the higher-indexed arm.
class OptimalAllocationTable {
 public:
  OptimalAllocationTable(const BanditInstance& instance, std::size_t max_budget);

  std::size_t max_budget() const { return max_budget_; }
  AllocationResult at(std::size_t budget) const;

 private:
  BanditInstance instance_;
  std::size_t num_arms_;
  std::size_t max_budget_;
  std::vector<std::uint32_t> choice_;  // choice_[i * (T+1) + b]: pulls of arm i
};

AllocationResult optimal_allocation_dp(const BanditInstance& instance, std::size_t horizon);

/// Exhaustive enumeration, N <= 4 and T <= 14; throws std::length_error otherwise.
AllocationResult brute_force_allocation(const BanditInstance& instance, std::size_t horizon);

double policy_regret(const BanditInstance& instance, const RunTrace& trace, std::size_t horizon);
double policy_regret(const OptimalAllocationTable& table, const BanditInstance& instance,
                     const RunTrace& trace);

/// n_arm*(h)/h for every h.
std::vector<double> optimal_pull_fraction(const BanditInstance& instance, std::size_t arm,
                                          std::span<const std::size_t> horizons);

/// Replays the optimal allocation of the run's horizon: arm 0 first, then arm 1, ...
class OptimalPolicy final : public Algorithm {
 public:
  explicit OptimalPolicy(std::shared_ptr<const OptimalAllocationTable> table)
      : table_(std::move(table)) {}
  std::string name() const override { return "optimal"; }
  void start(std::size_t num_arms, std::size_t horizon) override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t, double, std::size_t) override {}

 private:
  std::shared_ptr<const OptimalAllocationTable> table_;
  std::vector<std::size_t> schedule_;
};

}  // namespace peakbandit
