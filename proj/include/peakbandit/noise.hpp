#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace peakbandit {

using Rng = std::mt19937_64;

enum class NoiseKind { none, bounded_uniform, gaussian };

std::string_view to_string(NoiseKind kind);

/// Additive observation noise. `scale` holds one parameter per arm: the
/// half-width for bounded_uniform, the standard deviation for gaussian.
/// A single entry is broadcast to every arm.
class NoiseModel {
 public:
  NoiseModel() = default;

  static NoiseModel none();
  static NoiseModel bounded_uniform(std::vector<double> half_widths);
  static NoiseModel gaussian(std::vector<double> sigmas);

  NoiseKind kind() const { return kind_; }
  double scale(std::size_t arm) const;
  const std::vector<double>& scales() const { return scale_; }
  bool is_noise_free() const;

 private:
  NoiseModel(NoiseKind kind, std::vector<double> scale);

  NoiseKind kind_ = NoiseKind::none;
  std::vector<double> scale_;
};

/// Draws f + eps for one pull of `arm`. Observations are not clipped.
double sample_observation(double true_value, const NoiseModel& noise, std::size_t arm, Rng& rng);

/// Stable 64-bit seed derivation (FNV-1a over the parts, then a splitmix64
/// finalizer). Used so that run seeds never depend on scheduling order.
class SeedHasher {
 public:
  SeedHasher& add(std::string_view text);
  SeedHasher& add(std::uint64_t value);
  std::uint64_t finish() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace peakbandit
