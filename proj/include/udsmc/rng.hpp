#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace udsmc {

// splitmix64 finalizer; good 64-bit mixing for key derivation.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(mix64(a) ^ b); }
inline uint64_t mix64(uint64_t a, uint64_t b, uint64_t c) {
  return mix64(mix64(a, b) ^ c);
}
inline uint64_t mix64(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  return mix64(mix64(a, b, c) ^ d);
}

// Random stream keyed by (seed, a, b, c). Streams with the same key produce
// the same sequence no matter which thread runs them, which is what makes
// parallel proposal generation bit-reproducible: every draw site derives its
// own key instead of sharing sequential generator state.
//
// Core generator is xoshiro256** seeded through splitmix64 expansion of the
// key. All variate transforms are implemented here (not std::<distribution>)
// because the standard ones are implementation-defined and would break
// determinism across toolchains.
class StreamRng {
 public:
  explicit StreamRng(uint64_t seed, uint64_t a = 0, uint64_t b = 0,
                     uint64_t c = 0) {
    uint64_t k = mix64(seed, a, b, c);
    // splitmix64 sequence from k; xoshiro state must not be all zero.
    for (auto& w : s_) {
      k += 0x9e3779b97f4a7c15ull;
      uint64_t z = k;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      w = z ^ (z >> 31);
    }
    s_[0] |= 1;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // [0, 1), 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1]; safe as a log() argument.
  double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double normal(double mean = 0.0, double sd = 1.0) {
    // Box-Muller, cosine branch only: fixed two-draw cost keeps stream
    // consumption predictable for tests that count draws.
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform index in [0, n). Lemire multiply-shift; bias is O(n / 2^64).
  size_t index(size_t n) {
    using u128 = unsigned __int128;
    return size_t((u128(next_u64()) * u128(n)) >> 64);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

// Stream roles keep draw sites from colliding on a key.
namespace rng_role {
inline constexpr uint64_t proposal = 0;    // (role, step, candidate index)
inline constexpr uint64_t downsample = 1;  // (role, step, 0)
inline constexpr uint64_t path = 2;        // (role, draw index, 0)
inline constexpr uint64_t table = 3;       // synthetic table generation
}  // namespace rng_role

}  // namespace udsmc
