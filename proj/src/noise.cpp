#include "peakbandit/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace peakbandit {

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none:
      return "none";
    case NoiseKind::bounded_uniform:
      return "bounded_uniform";
    case NoiseKind::gaussian:
      return "gaussian";
  }
  return "unknown";
}

NoiseModel::NoiseModel(NoiseKind kind, std::vector<double> scale)
    : kind_(kind), scale_(std::move(scale)) {
  if (kind_ != NoiseKind::none && scale_.empty()) {
    throw std::invalid_argument("noise model needs at least one scale parameter");
  }
  for (double s : scale_) {
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("noise scale must be finite and >= 0");
    }
  }
}

NoiseModel NoiseModel::none() { return NoiseModel(NoiseKind::none, {}); }

NoiseModel NoiseModel::bounded_uniform(std::vector<double> half_widths) {
  return NoiseModel(NoiseKind::bounded_uniform, std::move(half_widths));
}

NoiseModel NoiseModel::gaussian(std::vector<double> sigmas) {
  return NoiseModel(NoiseKind::gaussian, std::move(sigmas));
}

double NoiseModel::scale(std::size_t arm) const {
  if (kind_ == NoiseKind::none) return 0.0;
  if (scale_.size() == 1) return scale_.front();
  if (arm >= scale_.size()) {
    throw std::out_of_range("noise model has no parameter for arm " + std::to_string(arm));
  }
  return scale_[arm];
}

bool NoiseModel::is_noise_free() const {
  if (kind_ == NoiseKind::none) return true;
  for (double s : scale_) {
    if (s != 0.0) return false;
  }
  return true;
}

double sample_observation(double true_value, const NoiseModel& noise, std::size_t arm, Rng& rng) {
  switch (noise.kind()) {
    case NoiseKind::none:
      return true_value;
    case NoiseKind::bounded_uniform: {
      const double eps = noise.scale(arm);
      if (eps == 0.0) return true_value;
      std::uniform_real_distribution<double> dist(-eps, eps);
      return true_value + dist(rng);
    }
    case NoiseKind::gaussian: {
      const double sigma = noise.scale(arm);
      if (sigma == 0.0) return true_value;
      std::normal_distribution<double> dist(0.0, sigma);
      return true_value + dist(rng);
    }
  }
  return true_value;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeedHasher& SeedHasher::add(std::string_view text) {
  for (unsigned char c : text) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  // separator so ("ab","c") and ("a","bc") differ
  state_ ^= 0xff;
  state_ *= 0x100000001b3ULL;
  return *this;
}

SeedHasher& SeedHasher::add(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (value >> (8 * i)) & 0xffU;
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

std::uint64_t SeedHasher::finish() const { return splitmix64(state_); }

}  // namespace peakbandit
