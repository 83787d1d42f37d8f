#pragma once

#include <cstdint>
#include <random>

#include "leoipac/types.hpp"

namespace leoipac {

/// Consumers of randomness. Each gets its own sub-seed so adding a consumer
/// never shifts the draws seen by another.
enum class StreamPurpose : std::uint64_t {
  Trajectory = 1,
  ClockBias = 2,
  ImuNoise = 3,
  ShadowFading = 4,
  PathGains = 5,
  TapEvolution = 6,
  Symbols = 7,
  Pilots = 8,
  CombinedNoise = 9,
  AntennaNoise = 10,
  MeasurementNoise = 11,
  InitialState = 12,
  Generic = 99,
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Sub-seed = mix(master, purpose, a, b, c) applied as a counter chain.
std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                          std::uint64_t a = 0, std::uint64_t b = 0,
                          std::uint64_t c = 0);

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Circularly-symmetric complex Gaussian with total variance `variance`.
  cd complex_normal(double variance = 1.0) {
    const double s = std::sqrt(0.5 * variance);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }
  std::uint64_t next_u64() { return engine_(); }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace leoipac
