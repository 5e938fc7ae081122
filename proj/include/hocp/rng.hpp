#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace hocp {

/// Counter-based SplitMix64 stream. Draw k of a stream with seed s is
/// mix(s + (k+1) * 0x9E3779B97F4A7C15), so streams are reproducible in any
/// language without relying on library distribution implementations.
///
///   uniform()  = (draw >> 11) * 2^-53          in [0, 1)
///   normal()   = Box-Muller with u1 = 1 - uniform(), u2 = uniform(),
///                returning sqrt(-2 ln u1) cos(2 pi u2); the sine half is
///                discarded so every normal consumes exactly two draws.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    ++counter_;
    return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

  /// Independent stream derived from this seed and a label.
  SplitMix64 fork(std::uint64_t label) const { return SplitMix64(mix(seed_ ^ mix(label + 1))); }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace hocp
