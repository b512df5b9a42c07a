#pragma once

#include <cstdint>

namespace quenchlab {

/// SplitMix64: the named project-wide PRNG. Instances record only the 64-bit
/// seed; every random decision derives from (seed, counter) so that the seed
/// to instance mapping is reproducible across languages and platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) without modulo bias (Lemire reduction).
  std::uint64_t below(std::uint64_t bound) {
    while (true) {
      const std::uint64_t x = next();
      const __uint128_t m = static_cast<__uint128_t>(x) * bound;
      const std::uint64_t lo = static_cast<std::uint64_t>(m);
      if (lo >= bound || lo >= (-bound) % bound) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  /// Derives an independent stream: mixes the key into a fresh seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t key) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (key + 1)));
    return g.next();
  }

 private:
  std::uint64_t state_;
};

}  // namespace quenchlab
