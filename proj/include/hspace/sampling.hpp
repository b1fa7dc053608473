#pragma once

// Platform-independent pseudo-random and quasi-random streams. Only integer
// arithmetic and exact double conversions are used, so every sequence is
// bit-reproducible across compilers and standard libraries.

#include <array>
#include <cmath>
#include <cstdint>

#include "hspace/coords.hpp"

namespace hspace {

/// SplitMix64 generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

/// Radical inverse of `index` in the given base.
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv_base = 1.0 / static_cast<double>(base);
  double f = inv_base, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv_base;
  }
  return r;
}

/// Halton sequence in bases 2,3,5,7,11,13 with a seed-derived Cranley-Patterson
/// rotation. Draw k is u_i = frac(halton_i(k+1) + r_i).
class HaltonSampler {
 public:
  explicit HaltonSampler(std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (auto& r : shift_) r = rng.uniform();
  }

  std::array<double, kDim> unit(std::uint64_t k) const {
    static constexpr std::array<std::uint64_t, kDim> bases{2, 3, 5, 7, 11, 13};
    std::array<double, kDim> u{};
    for (int i = 0; i < kDim; ++i) {
      double v = radical_inverse(k + 1, bases[i]) + shift_[i];
      u[i] = v >= 1.0 ? v - 1.0 : v;
    }
    return u;
  }

 private:
  std::array<double, kDim> shift_{};
};

}  // namespace hspace
