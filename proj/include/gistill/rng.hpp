#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace gistill {

// FNV-1a 64-bit. Used for stream derivation, held-out splits and manifest
// hashes; stability across runs matters, cryptographic strength does not.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic counter-based generator (splitmix64). Every stochastic
// operation derives its own stream from (global seed, stage name, entity id),
// so no ambient randomness leaks between stages.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; implementation-pinned so streams are
  // reproducible independent of the standard library.
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t derive_seed(std::uint64_t global_seed,
                                 std::string_view stage) {
  return fnv1a64(stage, fnv1a64_mix(0xcbf29ce484222325ull, global_seed));
}

inline std::uint64_t derive_seed(std::uint64_t global_seed,
                                 std::string_view stage,
                                 std::string_view entity) {
  return fnv1a64(entity, derive_seed(global_seed, stage));
}

inline std::uint64_t derive_seed(std::uint64_t global_seed,
                                 std::string_view stage, std::uint64_t index) {
  return fnv1a64_mix(derive_seed(global_seed, stage), index);
}

}  // namespace gistill
