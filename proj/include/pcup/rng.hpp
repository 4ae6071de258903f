#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace pcup {

/// SplitMix64 generator.
///
/// State is a single 64-bit word advanced by the golden-ratio increment
/// 0x9E3779B97F4A7C15 and finalised with the Stafford "Mix13" variant:
///
///   z = (state += 0x9E3779B97F4A7C15)
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// All derived quantities (doubles, bounded integers, child streams) are
/// defined below in terms of next_u64() alone, so outputs are identical on
/// every platform and standard library.
class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1): top 53 bits scaled by 2^-53.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, bound) by rejection on the top of the 64-bit range.
  /// bound must be > 0.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

  /// Independent child stream; consumes one output of this stream.
  constexpr Rng split() noexcept { return Rng(mix(next_u64() ^ 0x6A09E667F3BCC909ULL)); }

  /// Deterministic child for a (seed, stream id) pair without touching any state.
  static constexpr Rng derive(std::uint64_t seed, std::uint64_t stream) noexcept {
    return Rng(mix(seed ^ mix(stream + 0xD1B54A32D192ED03ULL)));
  }

  template <class T>
  constexpr void shuffle(std::span<T> values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace pcup
