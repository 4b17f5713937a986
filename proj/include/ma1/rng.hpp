#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ma1 {

namespace detail {

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// splitmix64 step; also used as the stream-derivation hash.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Combine a seed with a stream index into a new seed. Replicate r of a cell
// gets the stream hash_combine(hash_combine(master, cell), r), so streams are
// disjoint regardless of which worker runs them.
inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  std::uint64_t s = seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 12) + (seed >> 4));
  detail::splitmix64(s);
  return detail::splitmix64(s);
}

// xoshiro256++ with explicit, platform-independent samplers. Seeded through
// splitmix64 so any 64-bit value (including 0) yields a valid state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = detail::splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1): 53-bit mantissa, offset by half a step
  // so 0 and 1 are never returned (log/quantile transforms stay finite).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::array<std::uint64_t, 4> state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t cell, std::uint64_t replicate) {
  return Rng(hash_combine(hash_combine(master_seed, cell), replicate));
}

}  // namespace ma1
