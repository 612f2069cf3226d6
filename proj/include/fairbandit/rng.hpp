#pragma once

#include <cstdint>
#include <limits>

namespace fairbandit {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the i-th output is a pure function of (key, i),
/// so the full state is two integers and streams can be derived or resumed
/// without replaying draws. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng() = default;
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// One draw, uniform on [0, 1) with 53 bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n >= 1 (Lemire's unbiased multiply-shift).
  std::uint64_t uniform_below(std::uint64_t n) noexcept {
    auto wide = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(wide);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        wide = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(wide);
      }
    }
    return static_cast<std::uint64_t>(wide >> 64);
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Which consumer a derived stream belongs to.
enum class StreamPurpose : std::uint64_t { Environment = 1, Policy = 2, Fuzz = 3 };

/// Independent stream for (master seed, episode index, purpose).
inline CounterRng derive_stream(std::uint64_t master_seed, std::uint64_t episode, StreamPurpose purpose) {
  std::uint64_t key = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  key = mix64(key ^ mix64(episode + 0x3c6ef372fe94f82bULL));
  key = mix64(key ^ mix64(static_cast<std::uint64_t>(purpose) * 0xa54ff53a5f1d36f1ULL));
  return CounterRng(key);
}

}  // namespace fairbandit
