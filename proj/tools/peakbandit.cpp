#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "peakbandit/errors.hpp"
#include "peakbandit/harness.hpp"

using namespace peakbandit;

namespace {

ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  Json doc = load_config_document(path);
  for (const std::string& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

int run(const std::string& path, const std::string& out, std::size_t seeds, std::size_t threads,
        const std::vector<std::string>& overrides) {
  ExperimentConfig config = load(path, overrides);
  if (seeds) config.seeds = seeds;
  if (threads) config.threads = threads;
  if (!out.empty()) config.output_dir = out;
  const ExperimentResult result = run_experiment(config);
  export_results(result, config.output_dir);

  const std::size_t last = result.horizons.back();
  std::printf("%s: %zu arms, %zu horizons up to %zu, %zu seeds\n", config.experiment_id.c_str(),
              result.num_arms, result.horizons.size(), last, config.seeds);
  std::printf("%-22s %14s %12s %14s\n", "algorithm", "regret/T", "se", "pull frac");
  for (const AggregateRow& a : result.aggregates) {
    if (a.horizon != last) continue;
    std::printf("%-22s %14.6g %12.3g %14.4f\n", a.algorithm.c_str(), a.mean_per_step_regret,
                a.se_per_step_regret, a.mean_pull_fraction);
  }
  std::printf("wrote %s\n", config.output_dir.c_str());
  return 0;
}

int validate(const std::string& path, const std::vector<std::string>& overrides) {
  const ExperimentConfig config = load(path, overrides);
  const BanditInstance instance = build_instance(config);
  const std::size_t first = min_feasible_horizon(instance.num_arms());
  if (first > config.max_horizon) {
    throw ConfigError("max_horizon " + std::to_string(config.max_horizon) +
                      " is below the shortest feasible horizon " + std::to_string(first));
  }
  const auto grid = horizon_grid(first, config.max_horizon, config.horizon_points);
  std::printf("config ok: %s\n", config.experiment_id.c_str());
  for (std::size_t i = 0; i < instance.num_arms(); ++i) {
    const RewardCurve& c = instance.arms[i];
    std::printf("  arm %zu: shape %s, f(1) = %.6g, f(T_max) = %.6g\n", i + 1,
                std::string(to_string(c.shape())).c_str(), c.at(1), c.tail());
  }
  std::printf("  noise %s, %zu horizons from %zu to %zu, %zu seeds, %zu algorithms\n",
              std::string(to_string(instance.noise.kind())).c_str(), grid.size(), grid.front(),
              grid.back(), config.seeds, config.algorithms.size());
  return 0;
}

int oracle(const std::string& path, std::size_t horizon, const std::vector<std::string>& overrides) {
  ExperimentConfig config = load(path, overrides);
  if (horizon > config.max_horizon) config.max_horizon = horizon;
  const BanditInstance instance = build_instance(config);
  const AllocationResult best = optimal_allocation_dp(instance, horizon);
  std::printf("horizon %zu\n", horizon);
  for (std::size_t i = 0; i < best.counts.size(); ++i) {
    std::printf("  arm %zu: %zu pulls\n", i + 1, best.counts[i]);
  }
  std::printf("value %.12g\nvalue/T %.12g\n", best.value,
              horizon ? best.value / static_cast<double>(horizon) : 0.0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for single-peaked bandits"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out;
  std::size_t seeds = 0;
  std::size_t threads = 0;
  std::size_t horizon = 0;
  std::vector<std::string> overrides;

  auto* run_cmd = app.add_subcommand("run", "run an experiment sweep and export results");
  run_cmd->add_option("--config", config_path, "experiment JSON (or a metadata.json)")->required();
  run_cmd->add_option("--out", out, "output directory");
  run_cmd->add_option("--seeds", seeds, "replicates per horizon")->check(CLI::PositiveNumber);
  run_cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--override", overrides, "key=value, dotted keys reach nested fields");

  auto* validate_cmd = app.add_subcommand("validate", "check a config and its curves");
  validate_cmd->add_option("--config", config_path, "experiment JSON")->required();
  validate_cmd->add_option("--override", overrides, "key=value");

  auto* oracle_cmd = app.add_subcommand("oracle", "print the optimal allocation for one horizon");
  oracle_cmd->add_option("--config", config_path, "experiment JSON")->required();
  oracle_cmd->add_option("--horizon", horizon, "budget T")->required();
  oracle_cmd->add_option("--override", overrides, "key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return run(config_path, out, seeds, threads, overrides);
    if (*validate_cmd) return validate(config_path, overrides);
    return oracle(config_path, horizon, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
