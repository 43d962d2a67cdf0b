#include "peakbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "peakbandit/errors.hpp"
#include "peakbandit/optimism_lp.hpp"
#include "peakbandit/spo.hpp"

#ifndef PEAKBANDIT_VERSION
#define PEAKBANDIT_VERSION "0.0.0"
#endif

namespace peakbandit {

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string where) : obj_(object), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(path(key) + " is required");
    return obj_.at(key);
  }

  double real(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path(key) + " must be finite");
    return x;
  }
  double real(const std::string& key, double fallback) {
    used_.insert(key);
    return has(key) ? real(key) : fallback;
  }

  std::size_t count(const std::string& key) {
    const Json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::size_t>();
    throw ConfigError(path(key) + " must be a nonnegative integer");
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    used_.insert(key);
    return has(key) ? count(key) : fallback;
  }

  std::string text(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key) + " must be a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    return has(key) ? text(key) : fallback;
  }

  std::vector<double> reals(const std::string& key) {
    const Json& v = raw(key);
    if (v.is_number()) return {real(key)};
    if (!v.is_array()) throw ConfigError(path(key) + " must be a number or an array of numbers");
    std::vector<double> out;
    for (const Json& x : v) {
      if (!x.is_number()) throw ConfigError(path(key) + " must contain only numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown key '" + path(key) + "'");
    }
  }

 private:
  const Json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_json(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

Json normalize_arm(const Json& arm, const std::string& where) {
  ObjectReader r(arm, where);
  const std::string type = r.text("type");
  Json out{{"type", type}};
  if (type == "saturating") {
    out["alpha"] = r.real("alpha");
    out["scale"] = r.real("scale", 1.0);
  } else if (type == "ramp") {
    out["alpha"] = r.real("alpha");
    out["scale"] = r.real("scale", 1.0);
    out["knee"] = r.real("knee");
  } else if (type == "peak") {
    for (const char* k : {"a", "b", "t0", "d", "g", "h"}) out[k] = r.real(k);
  } else if (type == "recommender") {
    for (const char* k : {"v", "n", "gamma", "c"}) out[k] = r.real(k);
  } else if (type == "constant") {
    out["value"] = r.real("value");
  } else if (type == "table") {
    out["values"] = r.reals("values");
  } else {
    throw ConfigError(where + ".type: unknown curve type '" + type +
                      "' (saturating, ramp, peak, recommender, constant, table)");
  }
  r.finish();
  return out;
}

Json normalize_instance(const Json& instance) {
  ObjectReader r(instance, "instance");
  const std::string family = r.text("family");
  Json out{{"family", family}};
  if (family == "peak_preset") {
    out["preset"] = r.text("preset");
    try {
      peak_preset(out["preset"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("instance.preset: ") + e.what());
    }
  } else if (family == "curves") {
    const Json& arms = r.raw("arms");
    if (!arms.is_array() || arms.empty()) throw ConfigError("instance.arms must be a nonempty array");
    Json list = Json::array();
    for (std::size_t i = 0; i < arms.size(); ++i) {
      list.push_back(normalize_arm(arms[i], "instance.arms[" + std::to_string(i) + "]"));
    }
    out["arms"] = list;
    const std::string form = r.text("recursion_form", "explicit");
    if (form != "explicit" && form != "implicit") {
      throw ConfigError("instance.recursion_form must be 'explicit' or 'implicit'");
    }
    out["recursion_form"] = form;
  } else if (family == "fico") {
    out["path"] = r.text("path");
    const std::string model = r.text("model", "score_change");
    if (model != "score_change" && model != "bank_utility") {
      throw ConfigError("instance.model must be 'score_change' or 'bank_utility'");
    }
    const std::string mode = r.text("mode", "expected");
    if (mode != "expected" && mode != "sampled") {
      throw ConfigError("instance.mode must be 'expected' or 'sampled'");
    }
    out["model"] = model;
    out["mode"] = mode;
    out["applicants_per_group"] =
        r.has("applicants_per_group") ? Json(r.count("applicants_per_group")) : Json(nullptr);
    r.count("applicants_per_group", 0);
    out["sample_seed"] = r.count("sample_seed", 0);
  } else if (family == "gaussian") {
    if (r.has("means")) {
      out["means"] = r.reals("means");
    } else {
      out["num_arms"] = r.count("num_arms");
      out["means_seed"] = r.count("means_seed", 0);
    }
  } else {
    throw ConfigError("instance.family: unknown family '" + family +
                      "' (peak_preset, curves, fico, gaussian)");
  }
  r.finish();
  return out;
}

Json normalize_noise(const Json& noise) {
  ObjectReader r(noise, "noise");
  const std::string kind = r.text("kind", "none");
  Json out{{"kind", kind}};
  if (kind == "none") {
    if (r.has("scale")) r.raw("scale");
  } else if (kind == "bounded_uniform" || kind == "gaussian") {
    const auto scales = r.reals("scale");
    if (scales.empty()) throw ConfigError("noise.scale must not be empty");
    for (double s : scales) {
      if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise.scale entries must be >= 0");
    }
    out["scale"] = scales;
  } else {
    throw ConfigError("noise.kind must be none, bounded_uniform or gaussian");
  }
  r.finish();
  return out;
}

std::size_t env_threads() {
  if (const char* env = std::getenv("PEAKBANDIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names{"spo",  "greedy", "one_step_optimistic",
                                              "exp3", "rexp3",  "ucb",
                                              "ducb", "swucb",  "optimal"};
  return names;
}

ExperimentConfig parse_config(const Json& document) {
  ObjectReader r(document, "config");
  ExperimentConfig c;
  c.experiment_id = r.text("experiment_id", c.experiment_id);
  if (c.experiment_id.empty()) throw ConfigError("config.experiment_id must not be empty");
  c.instance = normalize_instance(r.raw("instance"));
  c.noise = r.has("noise") ? normalize_noise(r.raw("noise")) : normalize_noise(Json::object());
  if (!r.has("noise")) r.text("noise", "");

  const Json& algs = r.raw("algorithms");
  if (!algs.is_array() || algs.empty()) {
    throw ConfigError("config.algorithms must be a nonempty array of names");
  }
  for (const Json& a : algs) {
    if (!a.is_string()) throw ConfigError("config.algorithms entries must be strings");
    const std::string name = a.get<std::string>();
    const auto& known = known_algorithms();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("config.algorithms: unknown algorithm '" + name + "'");
    }
    if (std::find(c.algorithms.begin(), c.algorithms.end(), name) != c.algorithms.end()) {
      throw ConfigError("config.algorithms: '" + name + "' listed twice");
    }
    c.algorithms.push_back(name);
  }

  if (r.has("baselines")) {
    ObjectReader b(r.raw("baselines"), "baselines");
    auto real_opt = [&](const char* k) -> std::optional<double> {
      return b.has(k) ? std::optional<double>(b.real(k)) : (b.real(k, 0.0), std::nullopt);
    };
    auto count_opt = [&](const char* k) -> std::optional<std::size_t> {
      return b.has(k) ? std::optional<std::size_t>(b.count(k)) : (b.count(k, 0), std::nullopt);
    };
    c.baselines.exp3_gamma = real_opt("exp3_gamma");
    c.baselines.rexp3_batch = count_opt("rexp3_batch");
    c.baselines.ucb_exploration = real_opt("ucb_exploration");
    c.baselines.ducb_discount = real_opt("ducb_discount");
    c.baselines.ducb_padding = real_opt("ducb_padding");
    c.baselines.swucb_window = count_opt("swucb_window");
    b.finish();
  } else {
    r.text("baselines", "");
  }

  if (r.has("spo")) {
    ObjectReader s(r.raw("spo"), "spo");
    c.spo_epsilon = s.real("epsilon", c.spo_epsilon);
    s.finish();
  } else {
    r.text("spo", "");
  }
  if (!(c.spo_epsilon >= 0.0 && c.spo_epsilon < 1.0)) {
    throw ConfigError("spo.epsilon must lie in [0,1)");
  }

  c.max_horizon = r.count("max_horizon");
  if (c.max_horizon == 0) throw ConfigError("config.max_horizon must be positive");
  c.horizon_points = r.count("horizon_points", c.horizon_points);
  if (c.horizon_points == 0) throw ConfigError("config.horizon_points must be >= 1");
  c.seeds = r.count("seeds", c.seeds);
  if (c.seeds == 0) throw ConfigError("config.seeds must be >= 1");
  c.threads = r.count("threads", c.threads);
  c.output_dir = r.text("output_dir", c.output_dir);
  c.pull_fraction_arm = r.count("pull_fraction_arm", c.pull_fraction_arm);
  r.finish();

  // catch parameter range errors at parse time
  try {
    resolve(c.baselines, 2, c.max_horizon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("baselines: ") + e.what());
  }
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment_id"] = c.experiment_id;
  j["instance"] = c.instance;
  j["noise"] = c.noise;
  j["algorithms"] = c.algorithms;
  j["baselines"] = {{"exp3_gamma", optional_json(c.baselines.exp3_gamma)},
                    {"rexp3_batch", optional_json(c.baselines.rexp3_batch)},
                    {"ucb_exploration", optional_json(c.baselines.ucb_exploration)},
                    {"ducb_discount", optional_json(c.baselines.ducb_discount)},
                    {"ducb_padding", optional_json(c.baselines.ducb_padding)},
                    {"swucb_window", optional_json(c.baselines.swucb_window)}};
  j["spo"] = {{"epsilon", c.spo_epsilon}};
  j["max_horizon"] = c.max_horizon;
  j["horizon_points"] = c.horizon_points;
  j["seeds"] = c.seeds;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  j["pull_fraction_arm"] = c.pull_fraction_arm;
  return j;
}

Json load_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("code_version")) {
    return doc.at("config");
  }
  return doc;
}

void apply_override(Json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  if (!document.is_object()) throw ConfigError("config document must be a JSON object");
  Json* node = &document;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty segment");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    Json& child = (*node)[part];
    if (child.is_null()) child = Json::object();
    if (!child.is_object()) throw ConfigError("override key '" + key + "' walks into a non-object");
    node = &child;
    start = dot + 1;
  }
}

NoiseModel build_noise(const Json& noise) {
  const std::string kind = noise.at("kind").get<std::string>();
  if (kind == "none") return NoiseModel::none();
  const auto scale = noise.at("scale").get<std::vector<double>>();
  return kind == "gaussian" ? NoiseModel::gaussian(scale) : NoiseModel::bounded_uniform(scale);
}

BanditInstance build_instance(const ExperimentConfig& config) {
  const Json& desc = config.instance;
  const std::string family = desc.at("family").get<std::string>();
  const std::size_t length = config.max_horizon;
  BanditInstance inst;
  try {
    if (family == "peak_preset") {
      const auto [f1, f2] = peak_preset(desc.at("preset").get<std::string>());
      inst.arms.push_back(make_peak_curve(f1, length));
      inst.arms.push_back(make_peak_curve(f2, length));
    } else if (family == "curves") {
      const RecursionForm form = desc.at("recursion_form") == "implicit"
                                     ? RecursionForm::implicit_form
                                     : RecursionForm::explicit_form;
      for (const Json& a : desc.at("arms")) {
        const std::string type = a.at("type").get<std::string>();
        if (type == "saturating") {
          inst.arms.push_back(make_saturating_curve(a["alpha"], a["scale"], length));
        } else if (type == "ramp") {
          inst.arms.push_back(make_ramp_curve(a["alpha"], a["scale"], a["knee"], length));
        } else if (type == "peak") {
          inst.arms.push_back(make_peak_curve({a["a"], a["b"], a["t0"], a["d"], a["g"], a["h"]},
                                              length));
        } else if (type == "recommender") {
          inst.arms.push_back(
              recommender_curve({a["v"], a["n"], a["gamma"], a["c"]}, length, form));
        } else if (type == "constant") {
          inst.arms.emplace_back(std::vector<double>(length, a["value"].get<double>()),
                                 ShapeTag::constant);
        } else {
          auto values = a["values"].get<std::vector<double>>();
          if (values.size() < length) {
            throw ConfigError("table curve has " + std::to_string(values.size()) +
                              " values, fewer than max_horizon " + std::to_string(length));
          }
          values.resize(length);
          inst.arms.push_back(RewardCurve::classified(std::move(values)));
        }
      }
    } else if (family == "fico") {
      const FicoGroupTable table = load_fico_groups(desc.at("path").get<std::string>());
      const std::size_t applicants = desc.at("applicants_per_group").is_null()
                                         ? length
                                         : desc.at("applicants_per_group").get<std::size_t>();
      if (applicants < length) {
        throw ConfigError("instance.applicants_per_group (" + std::to_string(applicants) +
                          ") must be >= max_horizon (" + std::to_string(length) + ")");
      }
      const FicoModel model = desc.at("model") == "score_change" ? FicoModel::score_change
                                                                  : FicoModel::bank_utility;
      const FicoMode mode = desc.at("mode") == "expected" ? FicoMode::expected : FicoMode::sampled;
      BanditInstance built =
          build_fico_curves(table, applicants, model, mode, desc.at("sample_seed").get<std::uint64_t>());
      inst.arms = std::move(built.arms);
    } else if (family == "gaussian") {
      std::vector<double> means;
      if (desc.contains("means")) {
        means = desc.at("means").get<std::vector<double>>();
      } else {
        Rng rng(desc.at("means_seed").get<std::uint64_t>());
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        means.resize(desc.at("num_arms").get<std::size_t>());
        for (double& m : means) m = unit(rng);
      }
      inst.arms = make_gaussian_instance(means, 0.0, length).arms;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
  if (inst.arms.empty()) throw ConfigError("instance has no arms");
  try {
    inst.noise = build_noise(config.noise);
    if (inst.noise.scales().size() > 1 && inst.noise.scales().size() != inst.arms.size()) {
      throw ConfigError("noise.scale has " + std::to_string(inst.noise.scales().size()) +
                        " entries for " + std::to_string(inst.arms.size()) + " arms");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
  return inst;
}

std::unique_ptr<Algorithm> make_algorithm(const std::string& name, const ExperimentConfig& config,
                                          const NoiseModel& noise, std::uint64_t seed,
                                          std::shared_ptr<const OptimalAllocationTable> table) {
  if (name == "spo") return std::make_unique<Spo>(noise, Spo::Options{config.spo_epsilon});
  if (name == "greedy") return std::make_unique<Greedy>();
  if (name == "one_step_optimistic") {
    return std::make_unique<OneStepOptimistic>(noise, config.spo_epsilon);
  }
  if (name == "exp3") return std::make_unique<Exp3>(config.baselines, seed);
  if (name == "rexp3") return std::make_unique<RExp3>(config.baselines, seed);
  if (name == "ucb") return std::make_unique<Ucb>(config.baselines);
  if (name == "ducb") return std::make_unique<DUcb>(config.baselines);
  if (name == "swucb") return std::make_unique<SwUcb>(config.baselines);
  if (name == "optimal") {
    if (!table) throw std::invalid_argument("optimal policy needs an allocation table");
    return std::make_unique<OptimalPolicy>(std::move(table));
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

std::size_t min_feasible_horizon(std::size_t num_arms) {
  std::size_t t = 1;
  while (num_arms * spo_init_length(t) > t) ++t;
  return t;
}

std::vector<std::size_t> horizon_grid(std::size_t first, std::size_t last, std::size_t points) {
  if (points == 0) throw std::invalid_argument("need at least one horizon point");
  if (first > last) throw std::invalid_argument("horizon grid start beyond its end");
  if (points == 1) return {last};
  std::vector<std::size_t> out;
  const double span = static_cast<double>(last - first);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = static_cast<double>(first) +
                     span * static_cast<double>(k) / static_cast<double>(points - 1);
    const auto h = static_cast<std::size_t>(std::llround(x));
    if (out.empty() || out.back() != h) out.push_back(h);
  }
  out.back() = last;
  return out;
}

std::uint64_t run_seed(const std::string& experiment_id, const std::string& algorithm,
                       std::size_t horizon, std::size_t replicate) {
  return SeedHasher()
      .add(experiment_id)
      .add(algorithm)
      .add(static_cast<std::uint64_t>(horizon))
      .add(static_cast<std::uint64_t>(replicate))
      .finish();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.config = config;
  const BanditInstance instance = build_instance(config);
  const std::size_t n = instance.num_arms();
  result.num_arms = n;
  if (config.pull_fraction_arm >= n) {
    throw ConfigError("pull_fraction_arm " + std::to_string(config.pull_fraction_arm) +
                      " but the instance has " + std::to_string(n) + " arms");
  }
  const std::size_t t_min = min_feasible_horizon(n);
  if (t_min > config.max_horizon) {
    throw ConfigError("max_horizon " + std::to_string(config.max_horizon) +
                      " is below the shortest horizon whose warm-up fits (" +
                      std::to_string(t_min) + ")");
  }
  result.horizons = horizon_grid(t_min, config.max_horizon, config.horizon_points);
  const auto table = std::make_shared<const OptimalAllocationTable>(instance, config.max_horizon);
  for (std::size_t h : result.horizons) result.optimal.push_back(table->at(h));

  const std::size_t per_alg = result.horizons.size() * config.seeds;
  const std::size_t total = config.algorithms.size() * per_alg;
  result.rows.resize(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      const std::size_t a = task / per_alg;
      const std::size_t h_index = (task % per_alg) / config.seeds;
      const std::size_t s = task % config.seeds;
      try {
        const std::string& name = config.algorithms[a];
        const std::size_t horizon = result.horizons[h_index];
        const std::uint64_t seed = run_seed(config.experiment_id, name, horizon, s);
        const std::uint64_t noise_seed = SeedHasher().add(seed).add("noise").finish();
        const std::uint64_t policy_seed = SeedHasher().add(seed).add("policy").finish();
        auto algorithm = make_algorithm(name, config, instance.noise, policy_seed, table);
        const auto t0 = std::chrono::steady_clock::now();
        const RunTrace trace = simulate_run(instance, *algorithm, horizon, noise_seed);
        const auto t1 = std::chrono::steady_clock::now();
        ResultRow& row = result.rows[task];
        row.experiment_id = config.experiment_id;
        row.algorithm = name;
        row.horizon = horizon;
        row.seed = s;
        row.cumulative_reward = cumulative_reward(trace, instance);
        row.optimal_value = result.optimal[h_index].value;
        row.policy_regret = row.optimal_value - row.cumulative_reward;
        row.per_step_regret = row.policy_regret / static_cast<double>(horizon);
        row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        row.pull_counts = trace.pull_counts;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
      }
    }
  };

  const std::size_t threads =
      std::min<std::size_t>(std::max<std::size_t>(1, config.threads ? config.threads : env_threads()),
                            std::max<std::size_t>(1, total));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.aggregates = aggregate(result.rows, config.pull_fraction_arm);
  return result;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows,
                                    std::size_t pull_fraction_arm) {
  std::vector<AggregateRow> out;
  std::map<std::pair<std::string, std::size_t>, std::vector<const ResultRow*>> groups;
  std::vector<std::pair<std::string, std::size_t>> order;
  for (const ResultRow& r : rows) {
    const auto key = std::make_pair(r.algorithm, r.horizon);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  for (const auto& key : order) {
    const auto& members = groups[key];
    AggregateRow a;
    a.algorithm = key.first;
    a.horizon = key.second;
    a.runs = members.size();
    double sum = 0.0;
    double lo = members.front()->per_step_regret;
    double hi = lo;
    double fraction = 0.0;
    for (const ResultRow* r : members) {
      sum += r->per_step_regret;
      lo = std::min(lo, r->per_step_regret);
      hi = std::max(hi, r->per_step_regret);
      if (pull_fraction_arm < r->pull_counts.size() && r->horizon > 0) {
        fraction += static_cast<double>(r->pull_counts[pull_fraction_arm]) /
                    static_cast<double>(r->horizon);
      }
    }
    const double count = static_cast<double>(members.size());
    // identical runs report their common value exactly
    a.mean_per_step_regret = lo == hi ? lo : sum / count;
    a.mean_pull_fraction = fraction / count;
    if (members.size() > 1 && lo != hi) {
      double ss = 0.0;
      for (const ResultRow* r : members) {
        const double d = r->per_step_regret - a.mean_per_step_regret;
        ss += d * d;
      }
      a.se_per_step_regret = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
    }
    out.push_back(a);
  }
  return out;
}

std::string results_csv(const std::vector<ResultRow>& rows, bool with_wall_time) {
  std::ostringstream out;
  out << "experiment_id,algorithm,horizon,seed,cumulative_reward,optimal_value,policy_regret,"
         "per_step_regret";
  if (with_wall_time) out << ",wall_time_ms";
  out << '\n';
  for (const ResultRow& r : rows) {
    out << r.experiment_id << ',' << r.algorithm << ',' << r.horizon << ',' << r.seed << ','
        << fmt(r.cumulative_reward) << ',' << fmt(r.optimal_value) << ','
        << fmt(r.policy_regret) << ',' << fmt(r.per_step_regret);
    if (with_wall_time) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", r.wall_time_ms);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string aggregates_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "algorithm,horizon,runs,mean_per_step_regret,se_per_step_regret,mean_pull_fraction\n";
  for (const AggregateRow& a : rows) {
    out << a.algorithm << ',' << a.horizon << ',' << a.runs << ',' << fmt(a.mean_per_step_regret)
        << ',' << fmt(a.se_per_step_regret) << ',' << fmt(a.mean_pull_fraction) << '\n';
  }
  return out.str();
}

std::string pulls_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "experiment_id,algorithm,horizon,seed,arm,pulls\n";
  for (const ResultRow& r : rows) {
    for (std::size_t i = 0; i < r.pull_counts.size(); ++i) {
      out << r.experiment_id << ',' << r.algorithm << ',' << r.horizon << ',' << r.seed << ','
          << i << ',' << r.pull_counts[i] << '\n';
    }
  }
  return out.str();
}

Json experiment_metadata(const ExperimentResult& result) {
  const ExperimentConfig& c = result.config;
  Json meta;
  meta["code_version"] = PEAKBANDIT_VERSION;
  meta["config"] = config_to_json(c);
  meta["num_arms"] = result.num_arms;
  meta["horizons"] = result.horizons;
  meta["horizon_rule"] =
      "evenly spaced integers from the smallest T with N*max(ceil(ln T),2) <= T up to max_horizon";
  Json optimal = Json::array();
  for (std::size_t i = 0; i < result.horizons.size(); ++i) {
    optimal.push_back({{"horizon", result.horizons[i]},
                       {"counts", result.optimal[i].counts},
                       {"value", result.optimal[i].value}});
  }
  meta["optimal_allocations"] = optimal;
  meta["estimator"] = "policy regret per run; aggregates are means over seeds with standard errors";
  meta["seed_derivation"] =
      "run seed = hash(experiment_id, algorithm, horizon, replicate); noise and policy streams "
      "are derived from it";
  const std::size_t t = c.max_horizon;
  meta["spo"] = {{"epsilon", c.spo_epsilon},
                 {"init_length_at_max_horizon", spo_init_length(t)},
                 {"delta_at_max_horizon", delta_for_horizon(c.spo_epsilon, t)}};
  const ResolvedBaselineConfig r = resolve(c.baselines, std::max<std::size_t>(result.num_arms, 1), t);
  meta["baseline_defaults"] = {
      {"exp3_gamma", "min(1, sqrt(N ln N / ((e-1) T)))"},
      {"rexp3_batch", "ceil(T^(2/3)); gamma from the EXP3 rule with T = batch"},
      {"ucb_exploration", 2.0},
      {"ducb_discount", "1 - 1/(4 sqrt(T))"},
      {"ducb_padding", 2.0},
      {"swucb_window", "ceil(4 sqrt(T ln T))"}};
  meta["baselines_at_max_horizon"] = {{"exp3_gamma", r.exp3_gamma},
                                      {"rexp3_batch", r.rexp3_batch},
                                      {"rexp3_gamma", r.rexp3_gamma},
                                      {"ucb_exploration", r.ucb_exploration},
                                      {"ducb_discount", r.ducb_discount},
                                      {"ducb_padding", r.ducb_padding},
                                      {"swucb_window", r.swucb_window}};
  const std::string family = c.instance.at("family").get<std::string>();
  if (family == "fico") {
    meta["fico"] = {{"score_range", {kFicoMinScore, kFicoMaxScore}},
                    {"repay_gain", kFicoRepayGain},
                    {"default_loss", kFicoDefaultLoss},
                    {"score_change_rescale", "(cumulative mean change + 150) / 225"},
                    {"bank_utility_rescale", "(utility + 4) / 5 with utility +1 repaid, -4 default"},
                    {"expected_mode_sampling", "mass quantiles at (j + 1/2)/N_a"}};
  }
  if (family == "curves") meta["recommender_recursion_form"] = c.instance.at("recursion_form");
  return meta;
}

void export_results(const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  write_file(dir / "results.csv", results_csv(result.rows));
  write_file(dir / "aggregates.csv", aggregates_csv(result.aggregates));
  write_file(dir / "pulls.csv", pulls_csv(result.rows));
  write_file(dir / "metadata.json", experiment_metadata(result).dump(2) + "\n");
  if (result.aggregates.empty()) return;

  fs::create_directories(dir / "plots", ec);
  if (ec) throw std::runtime_error("cannot create '" + (dir / "plots").string() + "'");
  std::vector<Series> regret;
  std::vector<Series> fraction;
  for (const std::string& name : result.config.algorithms) {
    Series r{name, {}, {}};
    Series f{name, {}, {}};
    for (const AggregateRow& a : result.aggregates) {
      if (a.algorithm != name) continue;
      r.x.push_back(static_cast<double>(a.horizon));
      r.y.push_back(a.mean_per_step_regret);
      f.x.push_back(static_cast<double>(a.horizon));
      f.y.push_back(a.mean_pull_fraction);
    }
    regret.push_back(r);
    if (name != "optimal") fraction.push_back(f);
  }
  Series opt{"optimal", {}, {}};
  for (std::size_t i = 0; i < result.horizons.size(); ++i) {
    opt.x.push_back(static_cast<double>(result.horizons[i]));
    opt.y.push_back(static_cast<double>(result.optimal[i].counts[result.config.pull_fraction_arm]) /
                    static_cast<double>(result.horizons[i]));
  }
  fraction.push_back(opt);
  write_file(dir / "plots" / "regret.svg",
             svg_line_chart(result.config.experiment_id + ": per-step policy regret", "horizon T",
                            "policy regret / T", regret));
  write_file(dir / "plots" / "pull_fraction.svg",
             svg_line_chart(result.config.experiment_id + ": pulls of arm " +
                                std::to_string(result.config.pull_fraction_arm + 1),
                            "horizon T", "fraction of pulls", fraction));
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};
  const double width = 760, height = 460;
  const double left = 70, right = 170, top = 40, bottom = 55;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool first = true;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_lo = x_hi = s.x[i];
        y_lo = y_hi = s.y[i];
        first = false;
      }
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  y_lo = std::min(y_lo, 0.0);
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  if (y_hi <= y_lo) y_hi = y_lo + 1;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
    << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * k / 4.0;
    o << "<line x1=\"" << px(xv) << "\" y1=\"" << top + plot_h << "\" x2=\"" << px(xv)
      << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"#333\"/>";
    o << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 18
      << "\" text-anchor=\"middle\">" << short_fmt(xv) << "</text>\n";
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\""
      << py(yv) << "\" stroke=\"#333\"/>";
    o << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
      << short_fmt(yv) << "</text>\n";
  }
  o << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
    << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << top + plot_h / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      o << (i ? " " : "") << px(series[s].x[i]) << ',' << py(series[s].y[i]);
    }
    o << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
      << left + plot_w + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << left + plot_w + 42 << "\" y=\"" << ly + 4 << "\">"
      << xml_escape(series[s].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace peakbandit
