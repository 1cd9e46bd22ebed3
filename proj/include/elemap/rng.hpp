#pragma once

#include <cstdint>

#include "elemap/core.hpp"

namespace elemap {

// splitmix64 finalizer. Used both as the sequential generator step and as
// the mixer for counter-based streams, so results are identical across
// platforms and independent of evaluation order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and up to three indices.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dull);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

// Maps 64 random bits to a double in [0, 1).
inline double bits_to_unit(std::uint64_t bits) {
  return double(bits >> 11) * 0x1.0p-53;
}

// Counter-based uniform sample in [0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  return bits_to_unit(derive_seed(seed, a, b, c));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return bits_to_unit(next_u64()); }

  // [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integers in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + std::int64_t(next_u64() % std::uint64_t(hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; consumes two draws.
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * kPi * u2);
  }

  Rng fork(std::uint64_t stream) { return Rng(derive_seed(next_u64(), stream)); }

 private:
  std::uint64_t state_;
};

}  // namespace elemap
