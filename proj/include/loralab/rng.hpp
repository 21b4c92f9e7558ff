#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "loralab/errors.hpp"

namespace loralab {

// Splittable counter-less PRNG. Streams are derived from a root seed plus a
// label (and optional numeric suffixes), so any consumer can reconstruct its
// stream without coordinating with others. Engine is xoshiro256**, seeded
// through splitmix64. Distributions are implemented here rather than taken
// from <random> because libstdc++/libc++ do not guarantee identical
// distribution output for the same engine stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : state_) w = splitmix64(x);
  }

  static uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  // Derives a named stream from (root, label, a, b). Equal inputs give equal
  // streams on every platform.
  static Rng stream(uint64_t root, std::string_view label, uint64_t a = 0,
                    uint64_t b = 0) {
    uint64_t x = root ^ fnv1a64(label);
    uint64_t m = splitmix64(x);
    x ^= a + 0x9e3779b97f4a7c15ull;
    m ^= splitmix64(x);
    x ^= b + 0x6a09e667f3bcc909ull;
    m ^= splitmix64(x);
    return Rng(m);
  }

  uint64_t next_u64() {
    uint64_t* s = state_;
    const uint64_t result = rotl(s[1] * 5, 7) * 9;
    const uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Multiply-shift map; the O(n / 2^64) bias is
  // far below anything observable here and the result is deterministic.
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw RangeError("rng: next_below(0)");
    return uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller. No spare caching so the draw count per
  // call is fixed.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
};

}  // namespace loralab
