#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pecon/rng.hpp"

namespace pecon {

using Permutation = std::vector<std::uint32_t>;

/// One Fisher-Yates iteration on `a`: swap a[i] with a uniform a[j], i <= j < n.
/// The last iteration is a no-op and consumes no randomness.
template <UniformSource R>
void shuffle_step(std::span<std::uint32_t> a, std::size_t i, R& rng) {
  const std::size_t n = a.size();
  if (i + 1 >= n) return;
  const auto j = static_cast<std::size_t>(rng.uniform(i, n - 1));
  std::swap(a[i], a[j]);
}

/// Uniform permutation of {0..n-1}; exactly n-1 draws.
template <UniformSource R>
Permutation fisher_yates(R& rng, std::size_t n) {
  Permutation a(n);
  std::iota(a.begin(), a.end(), 0u);
  for (std::size_t i = 0; i < n; ++i) shuffle_step(std::span(a), i, rng);
  return a;
}

/// Sequential emulation of the pipelined shuffle: q Fisher-Yates lanes,
/// lane k started k periods after lane 0, so each lane is at a different loop
/// step. Every period all active lanes advance one step; once warm exactly one
/// lane finishes and its permutation is emitted before it starts reshuffling.
class ShufflePipeline {
 public:
  explicit ShufflePipeline(std::size_t q);

  template <UniformSource R>
  std::optional<Permutation> step(R& rng) {
    std::optional<Permutation> out;
    const std::size_t q = lanes_.size();
    const std::size_t active = period_ + 1 < q ? period_ + 1 : q;
    for (std::size_t k = 0; k < active; ++k) {
      shuffle_step(std::span(lanes_[k]), steps_[k], rng);
      if (++steps_[k] == q) {
        steps_[k] = 0;
        out = lanes_[k];
      }
    }
    ++period_;
    return out;
  }

  std::size_t size() const { return lanes_.size(); }
  std::uint64_t period() const { return period_; }
  /// Loop step lane k will execute next.
  std::size_t lane_step(std::size_t k) const { return steps_.at(k); }

 private:
  std::vector<Permutation> lanes_;
  std::vector<std::size_t> steps_;
  std::uint64_t period_ = 0;
};

/// partner[i] = j iff i and j are paired; an odd leftover has no partner.
struct Pairing {
  std::vector<std::optional<std::uint32_t>> partner;

  /// Pairs in the order they appear in the permutation.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;

  bool is_involution() const;
};

/// Pairs perm[2i] with perm[2i+1].
Pairing pairing_from_permutation(std::span<const std::uint32_t> perm);

}  // namespace pecon
