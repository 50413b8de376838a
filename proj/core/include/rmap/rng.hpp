// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace rmap {

// Deterministic 64-bit generator (splitmix64 update and finalizer).
// Hand-rolled instead of <random> engines so that every sequence is
// bit-identical across platforms and standard library implementations;
// reproducibility of whole runs depends on it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, n). Rejection keeps the draw unbiased; n == 0
  // would be a caller bug and maps to 0 to stay total.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1), 53 significant bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi). Degenerate ranges (lo == hi) return lo exactly
  // while still consuming one draw, so the stream layout is range-independent.
  double uniform(double lo, double hi) {
    const double u = next_double();
    return lo + (hi - lo) * u;
  }

  // Standard normal via Box-Muller, one value per call (no cached spare,
  // which would make the stream position depend on call history).
  double normal() {
    const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Stateless mix of a base seed and a stream index. Used to derive
  // decorrelated child seeds (one per region, per subsystem, ...).
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (stream * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
    return r.next_u64();
  }

  static Rng child(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed, stream));
  }

 private:
  std::uint64_t state_;
};

}  // namespace rmap
