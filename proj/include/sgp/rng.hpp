#pragma once

#include <cmath>
#include <cstdint>

namespace sgp {

// SplitMix64 finalizer. Good avalanche, cheap, and stateless — we use it as a
// keyed counter generator so a draw is a pure function of (seed, stream, step)
// and can never depend on thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Counter-based RNG keyed by (seed, stream). Streams derived from distinct
// (seed, node, t) tuples are independent for all practical purposes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(hash_combine(seed, stream)) {}

  std::uint64_t next_u64() { return splitmix64(key_ + kGamma * ++ctr_); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Lemire multiply-shift; tiny bias (< 2^-64) is
  // irrelevant here and the mapping is exactly reproducible.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller. The sine branch is discarded: two u64
  // draws per deviate keeps the counter arithmetic trivially reproducible.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();  // guard log(0)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// Convenience: one draw from the stream addressed by (seed, a, b).
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return hash_combine(hash_combine(seed, a), b);
}

}  // namespace sgp
