#pragma once

#include <cstdint>

namespace slowfast {

// SplitMix64 finalizer. Bijective on 64-bit words, full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// 2^64 / golden ratio, the SplitMix64 stream increment.
inline constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ULL;

// Hash of (seed, word). For a fixed seed, distinct words give distinct
// outputs: the pre-mix inputs differ (the stride is odd) and mix64 is a
// bijection.
constexpr std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t word) noexcept {
  return mix64(seed + kSeedStride * (word + 1));
}

// Deterministic per-macro-step seed derivation from one master seed.
//
// step_seed(n) is the seed of the micro chain advanced at macro step n.
// replica_seed(n, s) is the seed of the s-th replica chain of an averaged
// (re)initialization performed at step n; step 0 is the plain initialization.
// The replica family of step n hangs off the sentinel word -1-n so it can
// never collide with a step seed.
struct SeedSchedule {
  std::uint64_t master_seed = 0;

  constexpr std::uint64_t step_seed(std::int64_t n) const noexcept {
    return seed_mix(master_seed, static_cast<std::uint64_t>(n));
  }
  constexpr std::uint64_t replica_seed(std::int64_t n, std::int64_t s) const noexcept {
    return seed_mix(step_seed(-1 - n), static_cast<std::uint64_t>(s));
  }
};

// Master seed for realization j of an ensemble experiment.
constexpr std::uint64_t realization_seed(std::uint64_t master_seed, std::int64_t j) noexcept {
  constexpr std::uint64_t kRealizationLane = 0x7265616cU;  // "real"
  return seed_mix(seed_mix(master_seed, kRealizationLane), static_cast<std::uint64_t>(j));
}

// Inverse standard normal CDF for u in (0, 1). Accurate to a few ulps.
double normal_quantile(double u);

// Counter-based Gaussian/uniform stream.
//
// Variate k of each lane is a pure function of (seed, k): normals come from
// the inverse CDF of a counter-indexed uniform, so generation is
// rejection-free, and the two lanes advance independent counters so a
// consumer of one never shifts the other. Both properties are load-bearing:
// the variance-reduced estimator replays the exact normal sequence under a
// different frozen slow state, and a Metropolis rejection must not desync
// the normal lane.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) noexcept
      : seed_(seed),
        normal_lane_(seed_mix(seed, kNormalLane)),
        uniform_lane_(seed_mix(seed, kUniformLane)) {}

  double next_normal() { return normal_quantile(word_to_unit(seed_mix(normal_lane_, normal_pos_++))); }
  double next_uniform() noexcept { return word_to_unit(seed_mix(uniform_lane_, uniform_pos_++)); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t normals_consumed() const noexcept { return normal_pos_; }
  std::uint64_t uniforms_consumed() const noexcept { return uniform_pos_; }

 private:
  static constexpr std::uint64_t kNormalLane = 0x6E6F726DU;   // "norm"
  static constexpr std::uint64_t kUniformLane = 0x756E6966U;  // "unif"

  // 53 high bits, offset to land strictly inside (0, 1).
  static double word_to_unit(std::uint64_t w) noexcept {
    return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed_;
  std::uint64_t normal_lane_;
  std::uint64_t uniform_lane_;
  std::uint64_t normal_pos_ = 0;
  std::uint64_t uniform_pos_ = 0;
};

}  // namespace slowfast
