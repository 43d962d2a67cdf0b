#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "peakbandit/core.hpp"

namespace peakbandit {

/// c - c * t^(-alpha)
RewardCurve make_saturating_curve(double alpha, double scale, std::size_t length);
/// min{c, c * (t/s)^alpha}; tagged unvalidated when not concave (alpha > 1).
RewardCurve make_ramp_curve(double alpha, double scale, double knee, std::size_t length);

/// a * exp(-b (t - t0)) + d / (exp(-g (t - t0)) + 1) + h
struct PeakParams {
  double a = 0.0;
  double b = 0.0;
  double t0 = 0.0;
  double d = 0.0;
  double g = 0.0;
  double h = 0.0;
};

double peak_value(const PeakParams& p, double t);
/// Throws std::invalid_argument if a value leaves [0,1]. Tagged single_peaked
/// when the tabulation passes the check, unvalidated otherwise.
RewardCurve make_peak_curve(const PeakParams& params, std::size_t length);

/// The two-arm sigmoid pairs "inc_dec_1", "inc_dec_2", "inc_dec_3".
std::pair<PeakParams, PeakParams> peak_preset(const std::string& name);

struct RecommenderParams {
  double v = 0.5;      // inherent value
  double n = 0.0;      // novelty
  double gamma = 0.5;  // novelty decay
  double c = 0.1;      // pull toward v
};

enum class RecursionForm { explicit_form, implicit_form };

std::string_view to_string(RecursionForm form);

/// f(0) = 0; explicit: f(t) = (1-c) f(t-1) + n gamma^t + c v,
/// implicit: f(t) = (f(t-1) + n gamma^t + c v) / (1+c); clipped to [0,1].
RewardCurve recommender_curve(const RecommenderParams& params, std::size_t length,
                              RecursionForm form = RecursionForm::explicit_form);

struct FicoRow {
  std::string group;
  int score = 0;
  double repay_prob = 0.0;
  double mass = 0.0;
};

struct FicoGroupTable {
  std::vector<FicoRow> rows;
  std::vector<std::string> groups;  // in order of first appearance

  std::vector<FicoRow> rows_of(const std::string& group) const;
};

/// CSV with header `group,score,repay_prob,mass`. Throws DataError with the
/// line number on malformed input.
FicoGroupTable parse_fico_groups(std::istream& in, const std::string& source = "<input>");
FicoGroupTable load_fico_groups(const std::string& path);

enum class FicoModel { score_change, bank_utility };
enum class FicoMode { expected, sampled };

std::string_view to_string(FicoModel model);
std::string_view to_string(FicoMode mode);

inline constexpr int kFicoMinScore = 300;
inline constexpr int kFicoMaxScore = 850;
inline constexpr double kFicoRepayGain = 75.0;
inline constexpr double kFicoDefaultLoss = 150.0;
// cumulative mean change in [-150, 75] maps to [0, 1]
inline constexpr double kScoreChangeOffset = 150.0;
inline constexpr double kScoreChangeSpan = 225.0;

struct FicoApplicant {
  int score = 0;
  double repay_prob = 0.0;
};

/// N_a applicants of one group, sorted by score descending (ties: higher
/// repay probability first). Expected mode takes the mass quantiles at
/// (j + 1/2)/N_a; sampled mode draws with replacement in proportion to mass.
std::vector<FicoApplicant> fico_applicants(const std::vector<FicoRow>& rows,
                                           std::size_t applicants, FicoMode mode, Rng& rng);

/// One arm per group. The returned instance has no observation noise.
BanditInstance build_fico_curves(const FicoGroupTable& table, std::size_t applicants_per_group,
                                 FicoModel model, FicoMode mode, std::uint64_t seed = 0);

/// Constant curves of length `length` at the given means, gaussian(sigma) noise.
BanditInstance make_gaussian_instance(const std::vector<double>& means, double sigma,
                                      std::size_t length);

}  // namespace peakbandit
