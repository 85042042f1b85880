#pragma once

#include <bit>
#include <cstdint>
#include <random>

namespace dgame {

// SplitMix64 finalizer. Stable across platforms; used for all seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ mix64(v));
}

inline std::uint64_t hash_double(std::uint64_t h, double v) noexcept {
  if (v == 0.0) v = 0.0;  // fold -0.0
  return hash_combine(h, std::bit_cast<std::uint64_t>(v));
}

/// Per-realization seed: mix(master, cell, index). Independent of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell_key,
                                    std::uint64_t run_index) noexcept {
  return hash_combine(hash_combine(mix64(master_seed), cell_key), run_index);
}

/// Deterministic random stream. The engine is the standard-specified
/// mt19937_64; the conversions below are ours so results do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n >= 1. Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next();
      if (x >= limit) return x % n;
    }
  }

  /// Fair coin from the top bit of one draw.
  bool coin() { return (next() >> 63) != 0; }

private:
  std::mt19937_64 engine_;
};

}  // namespace dgame
