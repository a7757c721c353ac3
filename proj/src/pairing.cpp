#include "pecon/pairing.hpp"

#include <stdexcept>

namespace pecon {

ShufflePipeline::ShufflePipeline(std::size_t q) : lanes_(q), steps_(q, 0) {
  if (q == 0) throw std::invalid_argument("ShufflePipeline: q must be positive");
  for (auto& lane : lanes_) {
    lane.resize(q);
    std::iota(lane.begin(), lane.end(), 0u);
  }
}

bool Pairing::is_involution() const {
  std::size_t unpaired = 0;
  for (std::size_t i = 0; i < partner.size(); ++i) {
    if (!partner[i]) {
      ++unpaired;
      continue;
    }
    const std::uint32_t j = *partner[i];
    if (j == i || j >= partner.size() || partner[j] != static_cast<std::uint32_t>(i)) return false;
  }
  return unpaired == partner.size() % 2;
}

Pairing pairing_from_permutation(std::span<const std::uint32_t> perm) {
  Pairing p;
  p.partner.assign(perm.size(), std::nullopt);
  for (std::size_t i = 0; i + 1 < perm.size(); i += 2) {
    const std::uint32_t a = perm[i];
    const std::uint32_t b = perm[i + 1];
    if (a >= perm.size() || b >= perm.size()) throw std::invalid_argument("pairing_from_permutation: not a permutation");
    p.partner[a] = b;
    p.partner[b] = a;
    p.pairs.emplace_back(a, b);
  }
  return p;
}

}  // namespace pecon
