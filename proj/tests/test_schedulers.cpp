#include <doctest.h>

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <random>

#include "pecon/schedulers.hpp"

using namespace pecon;
using namespace pecon::sched;

namespace {

std::vector<Job> random_jobs(std::mt19937_64& gen, std::size_t n, bool deadlines) {
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    Job j;
    j.id = static_cast<int>(i);
    j.release = static_cast<Rounds>(gen() % 4);
    j.deadline = deadlines ? j.release + 1 + static_cast<Rounds>(gen() % 8) : 1000;
    j.weight = 1 + static_cast<std::int64_t>(gen() % 9);
    jobs.push_back(j);
  }
  return jobs;
}

std::int64_t brute_assignment(const std::vector<std::vector<std::int64_t>>& cost) {
  std::vector<std::size_t> cols(cost[0].size());
  std::iota(cols.begin(), cols.end(), 0);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  do {
    std::int64_t c = 0;
    for (std::size_t i = 0; i < cost.size(); ++i) c += cost[i][cols[i]];
    best = std::min(best, c);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

}  // namespace

TEST_CASE("wealth of list schedules") {
  const std::vector<Job> jobs{{0, 0, 5, 2}, {1, 0, 6, 3}, {2, 1, 4, 4}};
  const auto g = mtw_greedy(jobs);
  CHECK(g.order == std::vector<std::size_t>{1, 2, 0});
  CHECK(g.completion == std::vector<Rounds>{3, 1, 2});
  CHECK(total_wealth(jobs, g) == 15 + 8 + 4);
  CHECK(total_wealth(jobs, mtw_optimal(jobs)) == mtw_brute_force(jobs));
  CHECK(total_wealth(jobs, mtw_optimal(jobs)) >= 27);

  // Releases force idle time.
  const std::vector<Job> late{{0, 3, 10, 1}, {1, 7, 10, 1}};
  const auto s = fifo_jobs(late);
  CHECK(s.completion == std::vector<Rounds>{4, 8});
  CHECK(fixed_order_schedule(late, {1, 0}).completion == std::vector<Rounds>{9, 8});

  CHECK_THROWS_AS(validate_jobs({{0, 2, 2, 1}}), ConfigError);
  CHECK_THROWS_AS(validate_jobs({{0, 0, 2, -1}}), ConfigError);
  CHECK_THROWS_AS(total_wealth(jobs, Schedule{}), std::invalid_argument);
}

TEST_CASE("greedy by weight can lose to fifo when deadlines bind") {
  const std::vector<Job> jobs{{1, 0, 3, 1}, {2, 0, 1, 5}};
  CHECK(total_wealth(jobs, fifo_jobs(jobs)) == 2);
  CHECK(total_wealth(jobs, mtw_greedy(jobs)) == 1);
  CHECK(total_wealth(jobs, mtw_optimal(jobs)) == 2);
}

TEST_CASE("assignment solver matches enumeration") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + gen() % 5;
    const std::size_t m = n + gen() % 3;
    std::vector<std::vector<std::int64_t>> cost(n, std::vector<std::int64_t>(m));
    for (auto& row : cost)
      for (auto& c : row) c = static_cast<std::int64_t>(gen() % 41) - 20;
    const auto col = solve_assignment(cost);
    std::int64_t total = 0;
    std::vector<bool> used(m, false);
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(col[i] < m);
      REQUIRE_FALSE(used[col[i]]);
      used[col[i]] = true;
      total += cost[i][col[i]];
    }
    CHECK(total == brute_assignment(cost));
  }
  CHECK_THROWS_AS(solve_assignment({{1}, {2}}), std::invalid_argument);
  CHECK(solve_assignment({}).empty());
}

TEST_CASE("optimal schedule matches exhaustive search") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 150; ++trial) {
    const auto jobs = random_jobs(gen, 1 + gen() % 7, true);
    const auto s = mtw_optimal(jobs);
    CHECK(total_wealth(jobs, s) == mtw_brute_force(jobs));
    for (std::size_t i = 0; i < jobs.size(); ++i) CHECK(s.completion[i] > jobs[i].release);
  }
}

TEST_CASE("greedy is optimal without binding deadlines") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 150; ++trial) {
    const auto jobs = random_jobs(gen, 1 + gen() % 7, false);
    const auto greedy = total_wealth(jobs, mtw_greedy(jobs));
    CHECK(greedy == mtw_brute_force(jobs));
    CHECK(greedy >= total_wealth(jobs, fifo_jobs(jobs)));
  }
}

TEST_CASE("fifo service of a burst") {
  std::vector<Arrival> burst(6, Arrival{0, 0});
  const auto out = fifo_schedule(burst);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].arrival == i);
    CHECK(out[i].round - burst[i].time + 1 == static_cast<Rounds>(i + 1));
  }
}

TEST_CASE("wf2q shares service by weight") {
  SUBCASE("equal weights alternate") {
    Wf2qScheduler s({1, 1});
    for (std::uint64_t k = 0; k < 10; ++k) {
      s.enqueue(0, k);
      s.enqueue(1, k);
    }
    for (int k = 0; k < 20; ++k) CHECK(s.serve()->first == static_cast<std::size_t>(k % 2));
    CHECK(s.empty());
    CHECK_FALSE(s.serve());
  }
  SUBCASE("three to one, with a bounded deficit") {
    Wf2qScheduler s({3, 1});
    for (std::uint64_t k = 0; k < 400; ++k) {
      s.enqueue(0, k);
      s.enqueue(1, k);
    }
    std::array<double, 2> served{};
    for (int k = 1; k <= 400; ++k) {
      const auto out = s.serve();
      served[out->first] += 1;
      CHECK(std::abs(served[0] - 0.75 * k) <= 1.0);
      CHECK(std::abs(served[1] - 0.25 * k) <= 1.0);
    }
    CHECK(served[0] == 300);
  }
  SUBCASE("one flow is fifo") {
    std::vector<Arrival> arrivals{{0, 0}, {0, 0}, {0, 3}, {0, 3}, {0, 10}};
    const auto a = wf2q_schedule({2.0}, arrivals);
    const auto b = fifo_schedule(arrivals);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].arrival == b[i].arrival);
      CHECK(a[i].round == b[i].round);
    }
  }
  SUBCASE("every arrival is served once, never early") {
    std::mt19937_64 gen(8);
    std::vector<Arrival> arrivals;
    for (int i = 0; i < 300; ++i) arrivals.push_back({gen() % 3, static_cast<Rounds>(gen() % 200)});
    const auto out = wf2q_schedule({1, 2, 5}, arrivals);
    std::vector<int> seen(arrivals.size(), 0);
    Rounds prev = -1;
    for (const auto& sv : out) {
      ++seen[sv.arrival];
      CHECK(sv.round >= arrivals[sv.arrival].time);
      CHECK(sv.round > prev);
      prev = sv.round;
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    CHECK_THROWS_AS(wf2q_schedule({1}, {{4, 0}}), ConfigError);
  }
  CHECK_THROWS_AS(Wf2qScheduler({}), ConfigError);
  CHECK_THROWS_AS(Wf2qScheduler({1, 0}), ConfigError);
}

TEST_CASE("closed-loop window flows") {
  const std::vector<WindowFlow> flows{{"economy", 6, 1}, {"business", 4, 4}};
  const auto fifo = simulate_window_flows(flows, Discipline::Fifo, 5000, 100);
  for (const auto& s : fifo) {
    CHECK(s.mean_delay() == doctest::Approx(10.0));
    CHECK(s.stddev_delay() == doctest::Approx(0.0));
  }
  CHECK(fifo[0].delivered + fifo[1].delivered == 4900);

  const auto wf = simulate_window_flows(flows, Discipline::Wf2q, 20000, 1000);
  CHECK(wf[1].mean_delay() < wf[0].mean_delay());
  CHECK(wf[0].delivered + wf[1].delivered == 19000);
  CHECK(parse_discipline(to_string(Discipline::Wf2q)) == Discipline::Wf2q);
  CHECK_THROWS_AS(parse_discipline("drr"), ConfigError);
}
