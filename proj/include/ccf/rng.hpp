#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ccf {

// Seedable generator used everywhere randomness is needed: xoshiro256**
// seeded through splitmix64 (both public-domain algorithms by Blackman &
// Vigna). The integer stream is a pure function of the seed and uses only
// 64-bit integer arithmetic, so it is identical on every platform.
// Floating-point derivations (uniform, normal) sit on top of that stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53 random mantissa bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal();

  // Unbiased integer in [0, n); rejection sampling on the raw stream.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  // First k positions of a partial Fisher-Yates pass over 0..n-1,
  // in draw order.
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k);

  // Deterministic per-task seed derivation (two splitmix64 finalizer
  // rounds over seed and index). Lets independent work items own private
  // streams regardless of execution order.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index);

 private:
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace ccf
