#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "pecon/analysis.hpp"
#include "pecon/rng.hpp"

using namespace pecon;
using namespace pecon::analysis;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

// The series term by term in exact rationals.
double exact_rational(int q) {
  cpp_rational total = 0;
  for (int s = 2; s <= q - 1; ++s) {
    cpp_int falling = 1;  // (q-2)! / (q-s-1)!
    for (int k = q - s; k <= q - 2; ++k) falling *= k;
    cpp_int power = 1;
    for (int k = 0; k < s; ++k) power *= (q - 2);
    total += cpp_rational(cpp_int(s) * (s - 1) * falling, power);
  }
  return static_cast<double>(total);
}

struct Sample {
  double mean = 0;
  double stderr_ = 0;
};

// An always-buying packet enters at the rear. Each round it meets a uniform
// partner among the other q - 2 idle packets and takes its place if it is ahead;
// then the queue advances one position.
Sample simulate_buyer(int q, std::int64_t deliveries, std::uint64_t seed) {
  CounterRng rng(seed);
  double sum = 0, sq = 0;
  for (std::int64_t i = 0; i < deliveries; ++i) {
    int pos = q - 1;
    int delay = 0;
    while (true) {
      ++delay;
      if (pos == 0) break;
      auto partner = static_cast<int>(rng.uniform(1, static_cast<std::uint64_t>(q - 2)));
      if (partner >= pos) ++partner;
      if (partner < pos) pos = partner;
      --pos;
    }
    sum += delay;
    sq += static_cast<double>(delay) * delay;
  }
  const double n = static_cast<double>(deliveries);
  const double mean = sum / n;
  return {mean, std::sqrt((sq / n - mean * mean) / n)};
}

}  // namespace

TEST_CASE("closed-form triple at q = 100") {
  CHECK(delay_lower_bound(100, 1) == doctest::Approx(10.41).epsilon(0.001));
  CHECK(exact_expected_delay(100) == doctest::Approx(13.0841).epsilon(1e-5));
  CHECK(delay_upper_bound(100, 1) == doctest::Approx(14.5).epsilon(1e-12));
  CHECK(exact_expected_delay(4) == doctest::Approx(2.5));
  CHECK(exact_expected_delay(3) == doctest::Approx(2.0));
  CHECK_THROWS_AS(exact_expected_delay(2), std::domain_error);
  CHECK_THROWS_AS(delay_upper_bound(100, 0), std::domain_error);
}

TEST_CASE("series matches exact rational arithmetic") {
  for (int q = 3; q <= 50; ++q) CHECK(exact_expected_delay(q) == doctest::Approx(exact_rational(q)).epsilon(1e-12));
  CHECK(exact_expected_delay(400) == doctest::Approx(exact_rational(400)).epsilon(1e-10));
}

TEST_CASE("series agrees with a direct simulation of the buying process") {
  for (int q : {10, 100}) {
    const auto s = simulate_buyer(q, 1'000'000, 31 + static_cast<std::uint64_t>(q));
    CHECK(std::fabs(s.mean - exact_expected_delay(q)) < 3 * s.stderr_);
  }
}

TEST_CASE("bounds sandwich the series and grow like the square root") {
  double prev = 0;
  for (int q = 10; q <= 1000; q += 10) {
    const double e = exact_expected_delay(q);
    CHECK(delay_lower_bound(q, 1) <= e);
    CHECK(e <= delay_upper_bound(q, 1));
    CHECK(e > prev);
    prev = e;
  }
  const double ratio = exact_expected_delay(1000) / exact_expected_delay(250);
  CHECK(ratio > 1.9);
  CHECK(ratio < 2.0);
  for (int b = 1; b <= 5; ++b) CHECK(delay_upper_bound(200, b + 1) < delay_upper_bound(200, b));
}

TEST_CASE("one-in-c sellers") {
  for (int q : {10, 57, 100, 1000}) {
    CHECK(delay_lower_bound_c(q, 1.0) == doctest::Approx(delay_lower_bound(q, 1)));
    CHECK(delay_upper_bound_c(q, 1.0) == doctest::Approx(delay_upper_bound(q, 1)));
  }
  CHECK(delay_upper_bound_c(100, 1 / 0.52) == doctest::Approx(19.45).epsilon(0.001));
  CHECK(delay_lower_bound_c(100, 2) < delay_upper_bound_c(100, 2));

  const auto plain = delay_bounds(100, 1);
  CHECK_FALSE(plain.heuristic);
  CHECK(plain.lower == doctest::Approx(delay_lower_bound(100, 1)));
  CHECK(delay_bounds(100, 2, 1.0).upper == doctest::Approx(delay_upper_bound(100, 2)));
  CHECK(delay_bounds(100, 2, 2.0).heuristic);
  CHECK(delay_bounds(100, 2, 2.0).upper == doctest::Approx(delay_upper_bound(100, 1)));
  CHECK_THROWS_AS(delay_bounds(100, 1, 0.5), std::domain_error);
}

TEST_CASE("expected minimum of uniforms") {
  CHECK(expected_min_uniform(3, 8) == doctest::Approx(2.0));
  CHECK(expected_min_uniform(1, 10) == doctest::Approx(5.0));
  CounterRng rng(12);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double m = 8;
    for (int k = 0; k < 3; ++k) m = std::min(m, 8 * rng.uniform01());
    sum += m;
  }
  CHECK(sum / n == doctest::Approx(2.0).epsilon(0.01));
  CHECK_THROWS_AS(expected_min_uniform(0, 1), std::domain_error);
}

TEST_CASE("worked wealth example") {
  const auto one = WealthScenarioParams::make(99, 1, 500, 1000, 1, 4);
  const auto five = WealthScenarioParams::make(95, 5, 500, 1000, 1, 4);
  CHECK(one.d_cap == 400);
  CHECK(wealth_no_trades(one) == doctest::Approx(402).epsilon(1e-12));
  CHECK(wealth_no_trades(five) == doctest::Approx(410).epsilon(1e-12));
  CHECK(wealth_ideal(one) == doctest::Approx(773.25).epsilon(1e-12));
  CHECK(wealth_ideal(five) == doctest::Approx(766.25).epsilon(1e-12));
  CHECK(wealth_ideal_feasible(one) == doctest::Approx(647).epsilon(1e-12));
  CHECK_THROWS_AS(wealth_ideal_feasible(five), std::domain_error);
  CHECK_THROWS_AS(WealthScenarioParams::make(10, 1, 5, 5, 1, 1, 5.0), std::domain_error);
}

TEST_CASE("equal maximum values make every cyclic schedule equally wealthy") {
  const std::vector<CyclicFlow> same{{30, 1, 12}, {30, 4, 7}, {30, 2, 9}};
  CHECK(equal_vmax_schedule_invariance(same, 6));
  const auto rates = cyclic_schedule_wealths(same, 6);
  REQUIRE(rates.size() == 1);
  CHECK(rates.front() == Rational(30 - 7));

  const std::vector<CyclicFlow> mixed{{10, 1, 10}, {20, 1, 10}};
  CHECK_FALSE(equal_vmax_schedule_invariance(mixed, 4));
  CHECK_THROWS_AS(cyclic_schedule_wealths({}, 3), std::invalid_argument);
}

TEST_CASE("bandwidth shares") {
  const auto r = bandwidth_share_rates(5, 40, 5);
  REQUIRE(r.size() == 2);
  CHECK(r[0].rate == doctest::Approx(1.0 / 40));
  CHECK(r[1].rate == doctest::Approx(7.0 / 40));
  CHECK(r[1].delay == doctest::Approx(40.0 / 7));
  CHECK_THROWS_AS(bandwidth_share_rates(40, 40, 1), std::domain_error);
}
