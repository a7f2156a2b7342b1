#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace advforge {

// Deterministic, bit-portable random streams. Implemented by hand because the
// standard <random> distributions are not guaranteed to produce identical
// sequences across library implementations, and byte-identical artifacts for a
// fixed seed are part of this project's contract. Algorithms: SplitMix64 and
// xoshiro256** (Blackman & Vigna, public domain reference implementations).
inline constexpr const char* kRngFamily = "xoshiro256ss";

/// SplitMix64 scrambler step: advances `state` and returns the next output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives an independent substream seed from a master seed and a path of
/// integers (for example {label, item_index}). Each path element is folded in
/// with one SplitMix64 scramble, so (master, path) -> seed is deterministic
/// and different paths give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master;
  (void)splitmix64_next(s);
  for (std::uint64_t p : path) {
    s ^= p + 0x9E3779B97F4A7C15ull;
    (void)splitmix64_next(s);
  }
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // Canonical xoshiro seeding: expand the 64-bit seed through SplitMix64.
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0,1) with 53 random mantissa bits.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [a,b); returns exactly `a` when a == b.
  double uniform(double a, double b) { return a + uniform01() * (b - a); }

  /// Unbiased integer in [0,n) via rejection; n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  bool chance(double p) { return uniform01() < p; }

  /// Fisher-Yates shuffle with this stream; std::shuffle is not portable.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = std::size_t(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace advforge
