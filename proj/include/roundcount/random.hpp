#pragma once

#include <cstdint>
#include <limits>

namespace roundcount {

/// SplitMix64: a counter-based generator. Draw i of a stream is
/// mix(start + (i + 1) * golden), so streams can be keyed by any 64-bit value.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t start) noexcept : state_(start) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

 private:
  std::uint64_t state_;
};

/// Independent stream for one replicate, reproducible regardless of the
/// order in which replicates are executed.
constexpr SplitMix64 rng_substream(std::uint64_t seed, std::uint64_t replicate_index) noexcept {
  const std::uint64_t key = SplitMix64::mix(seed ^ 0x6a09e667f3bcc909ULL);
  return SplitMix64(SplitMix64::mix(key + SplitMix64::mix(replicate_index + SplitMix64::kGolden)));
}

}  // namespace roundcount
