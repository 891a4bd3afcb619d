#ifndef WELDOPT_RNG_HPP
#define WELDOPT_RNG_HPP

#include <cstdint>

#include "weldopt/error.hpp"

namespace weldopt {

// SplitMix64 (Steele, Lea, Flood 2014). Every random draw in the library
// (fold shuffles, bootstraps, feature subsampling) comes from this generator,
// so results depend only on the seed and never on the platform's <random>.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform integer in [0, bound). Rejection sampling keeps it exactly uniform.
  constexpr std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw argument_error("Rng::below: bound must be positive");
    // 2^64 mod bound, computed without 128-bit arithmetic.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent child seed for stream `index` of `seed` (tree t of a forest, fold f, ...).
  static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix(seed ^ mix((index + 1) * kGamma));
  }

 private:
  std::uint64_t state_;
};

}  // namespace weldopt

#endif  // WELDOPT_RNG_HPP
