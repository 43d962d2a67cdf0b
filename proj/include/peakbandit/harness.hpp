#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "peakbandit/baselines.hpp"
#include "peakbandit/core.hpp"
#include "peakbandit/envs.hpp"
#include "peakbandit/oracle.hpp"

namespace peakbandit {

using Json = nlohmann::ordered_json;

/// Resolved experiment description. Built from JSON by parse_config, which
/// rejects unknown keys and fills every default.
struct ExperimentConfig {
  std::string experiment_id = "experiment";
  Json instance;  // validated instance description, see build_instance
  Json noise = Json{{"kind", "none"}};
  std::vector<std::string> algorithms;
  BaselineConfig baselines;
  double spo_epsilon = 0.05;
  std::size_t max_horizon = 0;
  std::size_t horizon_points = 100;
  std::size_t seeds = 30;
  std::size_t threads = 0;  // 0: PEAKBANDIT_THREADS, else hardware concurrency
  std::string output_dir = "results";
  std::size_t pull_fraction_arm = 0;
};

/// Algorithm names accepted in the config.
const std::vector<std::string>& known_algorithms();

/// Throws ConfigError on schema violations.
ExperimentConfig parse_config(const Json& document);
/// Reads a config file, or the "config" member of a metadata.json.
Json load_config_document(const std::string& path);
/// Sets a dotted path (a.b.c) to `value`, parsed as JSON or taken as a string.
void apply_override(Json& document, const std::string& assignment);
Json config_to_json(const ExperimentConfig& config);

NoiseModel build_noise(const Json& noise);
/// Curves of length max_horizon plus the configured noise. Throws ConfigError
/// for bad parameters and DataError for unreadable data files.
BanditInstance build_instance(const ExperimentConfig& config);

std::unique_ptr<Algorithm> make_algorithm(const std::string& name, const ExperimentConfig& config,
                                          const NoiseModel& noise, std::uint64_t seed,
                                          std::shared_ptr<const OptimalAllocationTable> table);

/// Smallest T with N * max(ceil(ln T), 2) <= T.
std::size_t min_feasible_horizon(std::size_t num_arms);
/// `points` evenly spaced integers from `first` to `last`, deduplicated; {last} if points == 1.
std::vector<std::size_t> horizon_grid(std::size_t first, std::size_t last, std::size_t points);

std::uint64_t run_seed(const std::string& experiment_id, const std::string& algorithm,
                       std::size_t horizon, std::size_t replicate);

struct ResultRow {
  std::string experiment_id;
  std::string algorithm;
  std::size_t horizon = 0;
  std::size_t seed = 0;  // replicate index
  double cumulative_reward = 0.0;
  double optimal_value = 0.0;
  double policy_regret = 0.0;
  double per_step_regret = 0.0;
  double wall_time_ms = 0.0;
  std::vector<std::size_t> pull_counts;
};

struct AggregateRow {
  std::string algorithm;
  std::size_t horizon = 0;
  std::size_t runs = 0;
  double mean_per_step_regret = 0.0;
  double se_per_step_regret = 0.0;
  double mean_pull_fraction = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::size_t> horizons;
  std::vector<AllocationResult> optimal;  // per horizon
  std::vector<ResultRow> rows;            // sorted by (algorithm order, horizon, seed)
  std::vector<AggregateRow> aggregates;
  std::size_t num_arms = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Mean and standard error of per_step_regret per (algorithm, horizon), in row order.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows,
                                    std::size_t pull_fraction_arm);

Json experiment_metadata(const ExperimentResult& result);

/// results.csv, aggregates.csv, pulls.csv, metadata.json, plots/*.svg.
void export_results(const ExperimentResult& result, const std::string& out_dir);

std::string results_csv(const std::vector<ResultRow>& rows, bool with_wall_time = true);
std::string aggregates_csv(const std::vector<AggregateRow>& rows);
std::string pulls_csv(const std::vector<ResultRow>& rows);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal standalone SVG line chart.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series);

}  // namespace peakbandit
