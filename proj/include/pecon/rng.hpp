#pragma once

#include <concepts>
#include <cstdint>
#include <limits>

namespace pecon {

__extension__ typedef unsigned __int128 UInt128;

/// Counter-based generator: the i-th output is a bijective mix of (key, i).
///
/// Streams are split by hashing a stream id into a fresh key, so every
/// simulation component owns an independent, reproducible sequence.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

  /// Independent child stream; does not advance this generator.
  constexpr CounterRng split(std::uint64_t stream) const {
    CounterRng child;
    child.key_ = mix(key_ ^ mix(stream + kGolden));
    return child;
  }

  /// Unbiased integer in [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t range = hi - lo;
    if (range == max()) return (*this)();
    const std::uint64_t span = range + 1;
    // Lemire's multiply-shift with rejection.
    UInt128 m = static_cast<UInt128>((*this)()) * span;
    auto low = static_cast<std::uint64_t>(m);
    if (low < span) {
      const std::uint64_t threshold = (0 - span) % span;
      while (low < threshold) {
        m = static_cast<UInt128>((*this)()) * span;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return lo + static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform01() < p); }

  constexpr std::uint64_t draws() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Anything that can produce a uniform integer in a closed range.
template <class R>
concept UniformSource = requires(R& r, std::uint64_t lo, std::uint64_t hi) {
  { r.uniform(lo, hi) } -> std::convertible_to<std::uint64_t>;
};

}  // namespace pecon
