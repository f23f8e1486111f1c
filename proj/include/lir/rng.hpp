#pragma once

#include <cmath>
#include <cstdint>

namespace lir {

// All randomized behavior in the engine flows from these primitives so that
// identical seeds give bit-identical results regardless of platform RNG
// library details. <random> distributions are implementation-defined and
// deliberately avoided.

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stable key derivation for independent substreams.
inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a + 0x9E3779B97F4A7C15ull * (b + 1));
}

/// Counter-free SplitMix64 stream.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    return mix64(state);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) via the multiply-high mapping.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }
};

/// Standard normals from SplitMix64 uniforms via the Box-Muller transform.
/// Fixed generation method: u1 in (0,1], u2 in [0,1), radius sqrt(-2 ln u1),
/// cos value emitted first, sin value cached.
struct GaussianStream {
  SplitMix64 rng;
  double spare = 0.0;
  bool have_spare = false;

  explicit GaussianStream(std::uint64_t key) : rng(key) {}

  double next() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double u1 = 1.0 - rng.next_unit();  // (0, 1]
    const double u2 = rng.next_unit();        // [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare = radius * std::sin(angle);
    have_spare = true;
    return radius * std::cos(angle);
  }
};

/// Substream tags. Each randomized component owns one so streams never alias.
namespace stream_tag {
inline constexpr std::uint64_t kSimHashPlane = 0xA1;
inline constexpr std::uint64_t kSketch = 0xA2;
inline constexpr std::uint64_t kKmeans = 0xA3;
inline constexpr std::uint64_t kSynthetic = 0xA4;
}  // namespace stream_tag

}  // namespace lir
