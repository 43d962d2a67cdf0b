#include "peakbandit/envs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "peakbandit/errors.hpp"

namespace peakbandit {

namespace {

void check_length(std::size_t length) {
  if (length == 0) throw std::invalid_argument("curve length must be positive");
}

RewardCurve tag_if(std::vector<double> values, ShapeTag wanted) {
  const ShapeTag tag = satisfies_shape(values, wanted) ? wanted : ShapeTag::unvalidated;
  return RewardCurve(std::move(values), tag);
}

}  // namespace

RewardCurve make_saturating_curve(double alpha, double scale, std::size_t length) {
  check_length(length);
  if (!(alpha > 0.0)) throw std::invalid_argument("saturating curve needs alpha > 0");
  if (!(scale > 0.0 && scale <= 1.0)) throw std::invalid_argument("scale must lie in (0,1]");
  std::vector<double> v(length);
  for (std::size_t t = 1; t <= length; ++t) {
    v[t - 1] = scale - scale * std::pow(static_cast<double>(t), -alpha);
  }
  return tag_if(std::move(v), ShapeTag::increasing_concave);
}

RewardCurve make_ramp_curve(double alpha, double scale, double knee, std::size_t length) {
  check_length(length);
  if (!(alpha > 0.0)) throw std::invalid_argument("ramp curve needs alpha > 0");
  if (!(scale > 0.0 && scale <= 1.0)) throw std::invalid_argument("scale must lie in (0,1]");
  if (!(knee > 0.0)) throw std::invalid_argument("ramp knee must be > 0");
  std::vector<double> v(length);
  for (std::size_t t = 1; t <= length; ++t) {
    v[t - 1] = std::min(scale, scale * std::pow(static_cast<double>(t) / knee, alpha));
  }
  return tag_if(std::move(v), ShapeTag::increasing_concave);
}

double peak_value(const PeakParams& p, double t) {
  return p.a * std::exp(-p.b * (t - p.t0)) + p.d / (std::exp(-p.g * (t - p.t0)) + 1.0) + p.h;
}

RewardCurve make_peak_curve(const PeakParams& params, std::size_t length) {
  check_length(length);
  std::vector<double> v(length);
  for (std::size_t t = 1; t <= length; ++t) {
    const double x = peak_value(params, static_cast<double>(t));
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument("peak curve leaves [0,1] at t = " + std::to_string(t) +
                                  " (value " + std::to_string(x) + ")");
    }
    v[t - 1] = x;
  }
  return tag_if(std::move(v), ShapeTag::single_peaked);
}

std::pair<PeakParams, PeakParams> peak_preset(const std::string& name) {
  if (name == "inc_dec_1") {
    return {{-0.0015, 0.01, 600, -0.95, 0.011, 1.0}, {-0.005, 0.009, 500, -0.7, 0.0099, 0.8}};
  }
  if (name == "inc_dec_2") {
    return {{-0.0015, 0.003, 600, -0.95, 0.004, 1.0}, {-0.008, 0.011, 400, -0.6, 0.012, 0.8}};
  }
  if (name == "inc_dec_3") {
    return {{-0.0015, 0.01, 600, -0.5, 0.011, 1.0}, {-0.005, 0.009, 500, -0.2, 0.0099, 0.8}};
  }
  throw std::invalid_argument("unknown peak preset '" + name + "'");
}

std::string_view to_string(RecursionForm form) {
  return form == RecursionForm::explicit_form ? "explicit" : "implicit";
}

RewardCurve recommender_curve(const RecommenderParams& p, std::size_t length,
                              RecursionForm form) {
  check_length(length);
  if (!(p.v >= 0.0 && p.v <= 1.0)) throw std::invalid_argument("recommender v must lie in [0,1]");
  if (!(p.n >= 0.0)) throw std::invalid_argument("recommender n must be >= 0");
  if (!(p.gamma > 0.0 && p.gamma < 1.0)) {
    throw std::invalid_argument("recommender gamma must lie in (0,1)");
  }
  if (!(p.c > 0.0 && p.c < 1.0)) throw std::invalid_argument("recommender c must lie in (0,1)");
  std::vector<double> v(length);
  double f = 0.0;
  double novelty = 1.0;
  for (std::size_t t = 1; t <= length; ++t) {
    novelty *= p.gamma;
    const double push = p.n * novelty + p.c * p.v;
    f = form == RecursionForm::explicit_form ? (1.0 - p.c) * f + push : (f + push) / (1.0 + p.c);
    f = std::clamp(f, 0.0, 1.0);
    v[t - 1] = f;
  }
  return RewardCurve::classified(std::move(v));
}

std::vector<FicoRow> FicoGroupTable::rows_of(const std::string& group) const {
  std::vector<FicoRow> out;
  for (const FicoRow& r : rows) {
    if (r.group == group) out.push_back(r);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  for (auto& c : cells) {
    const auto first = c.find_first_not_of(" \t\r");
    const auto last = c.find_last_not_of(" \t\r");
    c = first == std::string::npos ? std::string() : c.substr(first, last - first + 1);
  }
  return cells;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw DataError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& text, const std::string& source, std::size_t line,
                  const char* column) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    fail(source, line, std::string("column '") + column + "': '" + text + "' is not a number");
  }
  return value;
}

}  // namespace

FicoGroupTable parse_fico_groups(std::istream& in, const std::string& source) {
  static const std::vector<std::string> kColumns{"group", "score", "repay_prob", "mass"};
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(source, 1, "empty file, expected a header");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_csv(line);
  for (const std::string& col : kColumns) {
    if (std::find(header.begin(), header.end(), col) == header.end()) {
      fail(source, line_no, "missing column '" + col + "'");
    }
  }
  if (header != kColumns) {
    fail(source, line_no, "header must be exactly 'group,score,repay_prob,mass'");
  }

  FicoGroupTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != kColumns.size()) {
      fail(source, line_no,
           "expected 4 fields, found " + std::to_string(cells.size()));
    }
    FicoRow row;
    row.group = cells[0];
    if (row.group.empty()) fail(source, line_no, "column 'group' is empty");
    {
      const std::string& s = cells[1];
      const char* end = s.data() + s.size();
      const auto [ptr, ec] = std::from_chars(s.data(), end, row.score);
      if (s.empty() || ec != std::errc() || ptr != end) {
        fail(source, line_no, "column 'score': '" + s + "' is not an integer");
      }
    }
    if (row.score < kFicoMinScore || row.score > kFicoMaxScore) {
      fail(source, line_no, "column 'score': " + std::to_string(row.score) +
                                " outside [300, 850]");
    }
    row.repay_prob = parse_real(cells[2], source, line_no, "repay_prob");
    if (row.repay_prob < 0.0 || row.repay_prob > 1.0) {
      fail(source, line_no, "column 'repay_prob': " + cells[2] + " outside [0, 1]");
    }
    row.mass = parse_real(cells[3], source, line_no, "mass");
    if (row.mass < 0.0) fail(source, line_no, "column 'mass': negative weight " + cells[3]);
    if (std::find(table.groups.begin(), table.groups.end(), row.group) == table.groups.end()) {
      table.groups.push_back(row.group);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) fail(source, line_no, "no data rows");
  for (const std::string& g : table.groups) {
    double total = 0.0;
    for (const FicoRow& r : table.rows) {
      if (r.group == g) total += r.mass;
    }
    if (!(total > 0.0)) throw DataError(source + ": group '" + g + "' has zero total mass");
  }
  return table;
}

FicoGroupTable load_fico_groups(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open FICO group file '" + path + "'");
  return parse_fico_groups(in, path);
}

std::string_view to_string(FicoModel model) {
  return model == FicoModel::score_change ? "score_change" : "bank_utility";
}

std::string_view to_string(FicoMode mode) {
  return mode == FicoMode::expected ? "expected" : "sampled";
}

std::vector<FicoApplicant> fico_applicants(const std::vector<FicoRow>& rows,
                                           std::size_t applicants, FicoMode mode, Rng& rng) {
  if (applicants == 0) throw std::invalid_argument("need at least one applicant per group");
  std::vector<FicoRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const FicoRow& a, const FicoRow& b) {
    return a.score != b.score ? a.score < b.score : a.repay_prob < b.repay_prob;
  });
  std::vector<double> cdf(sorted.size());
  double total = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) cdf[i] = (total += sorted[i].mass);
  if (!(total > 0.0)) throw std::invalid_argument("group has zero total mass");

  std::vector<FicoApplicant> out(applicants);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 0; j < applicants; ++j) {
    const double q = mode == FicoMode::expected
                         ? (static_cast<double>(j) + 0.5) / static_cast<double>(applicants)
                         : unit(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), q * total);
    // skip zero-mass rows sitting at the boundary
    while (it != cdf.end() && sorted[static_cast<std::size_t>(it - cdf.begin())].mass == 0.0) ++it;
    if (it == cdf.end()) it = std::prev(cdf.end());
    const FicoRow& r = sorted[static_cast<std::size_t>(it - cdf.begin())];
    out[j] = {r.score, r.repay_prob};
  }
  std::sort(out.begin(), out.end(), [](const FicoApplicant& a, const FicoApplicant& b) {
    return a.score != b.score ? a.score > b.score : a.repay_prob > b.repay_prob;
  });
  return out;
}

BanditInstance build_fico_curves(const FicoGroupTable& table, std::size_t applicants_per_group,
                                 FicoModel model, FicoMode mode, std::uint64_t seed) {
  if (applicants_per_group == 0) throw std::invalid_argument("applicants_per_group must be >= 1");
  BanditInstance inst;
  inst.noise = NoiseModel::none();
  const double n_a = static_cast<double>(applicants_per_group);
  for (std::size_t g = 0; g < table.groups.size(); ++g) {
    Rng rng(SeedHasher().add(seed).add(table.groups[g]).finish());
    const auto people = fico_applicants(table.rows_of(table.groups[g]), applicants_per_group,
                                        mode, rng);
    std::vector<double> f(people.size());
    double change = 0.0;
    std::bernoulli_distribution coin;
    for (std::size_t m = 0; m < people.size(); ++m) {
      const double s = people[m].score;
      const double p = people[m].repay_prob;
      const double up = std::min<double>(kFicoMaxScore, s + kFicoRepayGain) - s;
      const double down = std::max<double>(kFicoMinScore, s - kFicoDefaultLoss) - s;
      double outcome_change;
      double utility01;
      if (mode == FicoMode::expected) {
        outcome_change = p * up + (1.0 - p) * down;
        utility01 = p;
      } else {
        const bool repaid = coin(rng, std::bernoulli_distribution::param_type(p));
        outcome_change = repaid ? up : down;
        utility01 = repaid ? 1.0 : 0.0;
      }
      if (model == FicoModel::score_change) {
        change += outcome_change;
        f[m] = std::clamp((change / n_a + kScoreChangeOffset) / kScoreChangeSpan, 0.0, 1.0);
      } else {
        f[m] = utility01;
      }
    }
    inst.arms.push_back(RewardCurve::classified(std::move(f)));
  }
  return inst;
}

BanditInstance make_gaussian_instance(const std::vector<double>& means, double sigma,
                                      std::size_t length) {
  check_length(length);
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  BanditInstance inst;
  for (double mu : means) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("arm means must lie in [0,1]");
    inst.arms.emplace_back(std::vector<double>(length, mu), ShapeTag::constant);
  }
  inst.noise = NoiseModel::gaussian({sigma});
  return inst;
}

}  // namespace peakbandit
