#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace liquidcast {

/// Deterministic random source. All value mappings (uniform, normal, bounded
/// integers, shuffles) are implemented here rather than with the standard
/// <random> distributions, because the standard distributions are
/// implementation-defined: the same seed must reproduce the same stream on any
/// platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  [[nodiscard]] std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  [[nodiscard]] double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  [[nodiscard]] double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  /// Standard normal deviate via Box-Muller (deterministic, no state cache).
  [[nodiscard]] double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  /// Uniform integer in [0, n), n > 0. Debiased by rejection.
  [[nodiscard]] std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  /// In-place Fisher-Yates shuffle with this generator.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// One round of the splitmix64 finalizer; a strong 64-bit mixer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic seed for a parallel work unit: independent seeds for
/// (base, stream, index) triples so per-config / per-index / per-replicate
/// streams never collide and results are independent of worker count.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base,
                                                  std::uint64_t stream,
                                                  std::uint64_t index) noexcept {
  return mix64(mix64(base ^ mix64(stream)) ^ index);
}

}  // namespace liquidcast
