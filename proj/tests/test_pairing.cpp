#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <map>
#include <set>
#include <stdexcept>

#include "pecon/pairing.hpp"

using namespace pecon;

namespace {

// Replays a fixed list of offsets: draw k returns lo + script[k].
struct ScriptedSource {
  std::vector<std::uint64_t> script;
  std::size_t used = 0;
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    if (used >= script.size()) throw std::out_of_range("script exhausted");
    const std::uint64_t v = lo + script[used++];
    if (v > hi) throw std::out_of_range("scripted draw out of range");
    return v;
  }
};

// All draw scripts for n elements: draw i ranges over n - i choices.
std::vector<std::vector<std::uint64_t>> all_scripts(std::size_t n) {
  std::vector<std::vector<std::uint64_t>> out{{}};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<std::vector<std::uint64_t>> next;
    for (const auto& s : out)
      for (std::uint64_t k = 0; k < n - i; ++k) {
        auto t = s;
        t.push_back(k);
        next.push_back(std::move(t));
      }
    out = std::move(next);
  }
  return out;
}

double critical(double df) {
  return boost::math::quantile(boost::math::chi_squared(df), 1.0 - 0.001);
}

}  // namespace

TEST_CASE("fisher-yates is a bijection from draw sequences to permutations") {
  for (std::size_t n = 1; n <= 4; ++n) {
    std::set<Permutation> seen;
    const auto scripts = all_scripts(n);
    for (const auto& script : scripts) {
      ScriptedSource src{script};
      const auto perm = fisher_yates(src, n);
      CHECK(src.used == n - 1);
      seen.insert(perm);
    }
    std::size_t fact = 1;
    for (std::size_t k = 2; k <= n; ++k) fact *= k;
    CHECK(scripts.size() == fact);
    CHECK(seen.size() == fact);
  }
}

TEST_CASE("pipeline warms up for q - 1 periods then emits every period") {
  for (std::size_t q : {1u, 2u, 3u, 5u, 8u}) {
    ShufflePipeline pipe(q);
    CounterRng rng(q);
    for (std::size_t t = 0; t + 1 < q; ++t) CHECK_FALSE(pipe.step(rng));
    for (std::size_t t = 0; t < 5 * q; ++t) {
      const auto perm = pipe.step(rng);
      REQUIRE(perm);
      Permutation sorted = *perm;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < q; ++i) CHECK(sorted[i] == i);
    }
    // Lanes stay staggered: all loop steps distinct.
    std::set<std::size_t> steps;
    for (std::size_t k = 0; k < q; ++k) steps.insert(pipe.lane_step(k));
    CHECK(steps.size() == q);
  }
  CHECK_THROWS_AS(ShufflePipeline(0), std::invalid_argument);
}

TEST_CASE("pipeline output is uniform over permutations of three") {
  ShufflePipeline pipe(3);
  CounterRng rng(2024);
  std::map<Permutation, std::int64_t> counts;
  const std::int64_t periods = 60000;
  std::int64_t emitted = 0;
  for (std::int64_t t = 0; t < periods + 2; ++t)
    if (auto p = pipe.step(rng)) {
      ++counts[*p];
      ++emitted;
    }
  CHECK(emitted == periods);
  CHECK(counts.size() == 6);
  const double expected = static_cast<double>(emitted) / 6.0;
  double chi2 = 0;
  for (const auto& [perm, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < critical(5));
}

TEST_CASE("pipeline output is uniform over position and value for q = 8") {
  constexpr std::size_t q = 8;
  ShufflePipeline pipe(q);
  CounterRng rng(77);
  std::vector<std::vector<std::int64_t>> table(q, std::vector<std::int64_t>(q, 0));
  std::int64_t emitted = 0;
  for (std::int64_t t = 0; t < 60000 + 7; ++t)
    if (auto p = pipe.step(rng)) {
      for (std::size_t pos = 0; pos < q; ++pos) ++table[pos][(*p)[pos]];
      ++emitted;
    }
  CHECK(emitted == 60000);
  const double expected = static_cast<double>(emitted) / q;
  double chi2 = 0;
  for (const auto& row : table)
    for (auto c : row) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < critical(static_cast<double>((q - 1) * (q - 1))));
}

TEST_CASE("pairing from a permutation is an involution") {
  CounterRng rng(9);
  for (std::size_t n = 0; n < 12; ++n) {
    const auto perm = fisher_yates(rng, n);
    const auto p = pairing_from_permutation(perm);
    CHECK(p.is_involution());
    CHECK(p.pairs.size() == n / 2);
    for (const auto& [a, b] : p.pairs) {
      CHECK(p.partner[a] == b);
      CHECK(p.partner[b] == a);
    }
  }
  const Permutation bad{0, 5};
  CHECK_THROWS_AS(pairing_from_permutation(bad), std::invalid_argument);

  Pairing broken;
  broken.partner = {1u, 0u, 0u};
  CHECK_FALSE(broken.is_involution());
}
