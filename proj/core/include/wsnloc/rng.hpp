#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wsnloc {

/// Deterministic, seed-portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the
/// C++ standard, and every variate below is derived from raw engine output
/// with a fixed recipe, so a seed reproduces the same stream on any
/// conforming implementation:
///   u64      raw engine output
///   uniform  (u64 >> 11) * 2^-53, in [0, 1)
///   normal   Box-Muller, z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
///   bounded  rejection sampling, no modulo bias
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal variate. Consumes exactly two uniforms.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Unbiased integer in [0, n). n must be nonzero.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Unbiased integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Decorrelated child seed for a named substream of a run seed. Scenario
/// runs give each concern (placement, motion, sensing, filtering) its own
/// stream so that algorithms never perturb each other's draws.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15ull));
}

}  // namespace wsnloc
