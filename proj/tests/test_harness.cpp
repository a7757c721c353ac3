#include <doctest.h>

#include <json.hpp>
#include <map>
#include <sstream>

#include "pecon/analysis.hpp"
#include "pecon/harness.hpp"

using namespace pecon;
using namespace pecon::harness;

namespace {

const ResultRow* find_row(const std::vector<ResultRow>& rows, const std::string& algo, int q, double c_b, int b,
                          const std::string& metric) {
  for (const auto& r : rows)
    if (r.algorithm == algo && r.q == q && r.c_b == c_b && r.b == b && r.metric == metric) return &r;
  return nullptr;
}

ExperimentSpec small_delay_spec() {
  auto s = ExperimentSpec::defaults(ExperimentId::Delay);
  s.q = {10, 20, 50};
  s.c_b = {1, 4};
  s.b = {1};
  s.repetitions = 2;
  s.fast = true;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("fair-share ratio") {
  CHECK(fair_share_ratio(10, 100, 1, 10) == doctest::Approx(1.0));
  CHECK(fair_share_ratio(50, 100, 5, 100) == doctest::Approx(10.0));
  CHECK(fair_share_ratio(0, 100, 1, 10) == doctest::Approx(0.0));
  CHECK_THROWS_AS(fair_share_ratio(0, 0, 1, 10), std::domain_error);
}

TEST_CASE("seeds are stable and distinct per cell") {
  CHECK(cell_seed(1, 2, 3) == cell_seed(1, 2, 3));
  CHECK(cell_seed(1, 2, 3) != cell_seed(1, 3, 2));
  CHECK(cell_seed(1, 2, 3) != cell_seed(2, 2, 3));
}

TEST_CASE("experiment configs") {
  const auto c = delay_experiment_config(50, 4, 2, 1, 1000, 9);
  CHECK_NOTHROW(c.validate());
  CHECK(c.queue_size == 50);
  CHECK(c.flows.front().value.v_max == Money::units(800));
  CHECK(c.flows.front().value.cost == Money::units(4));
  CHECK(c.flows.back().value.v_max == Money::units(200));
  CHECK(c.warmup_rounds == 200);
  CHECK_THROWS_AS(delay_experiment_config(10, 4, 1, 10, 100, 1), ConfigError);

  const auto w = wealth_example_config(5, 1, 1000, 400, 1);
  CHECK(w.flows.size() == 100);
  CHECK(w.flows.back().value.d_max == 400);
  CHECK(w.flows.front().value.d_max == 250);
}

TEST_CASE("delay grid: fifo waits q, cheap business packets do not gain") {
  const auto rows = run_experiment_delay(small_delay_spec());
  for (int q : {10, 20, 50}) {
    const auto* fifo = find_row(rows, "FIFO", q, 4, 0, "mean_delay_business");
    REQUIRE(fifo);
    CHECK(fifo->value == doctest::Approx(q));
    const auto* pe1 = find_row(rows, "PE", q, 1, 1, "mean_delay_business");
    REQUIRE(pe1);
    CHECK(pe1->value == doctest::Approx(q));
    const auto* pe4 = find_row(rows, "PE", q, 4, 1, "mean_delay_business");
    REQUIRE(pe4);
    CHECK(pe4->value < q);
  }
  CHECK(find_row(rows, "PE", 50, 0, 1, "delay_exact"));
  CHECK(find_row(rows, "PE", 0, 4, 1, "loglog_slope_business_delay"));
}

TEST_CASE("delay at q = 100 sits between the bounds") {
  auto s = small_delay_spec();
  s.q = {100};
  s.c_b = {4};
  s.algorithms = {"PE"};
  s.fast = false;
  s.repetitions = 4;
  const auto rows = run_experiment_delay(s);
  const auto* pe = find_row(rows, "PE", 100, 4, 1, "mean_delay_business");
  REQUIRE(pe);
  CHECK(pe->value >= analysis::delay_lower_bound(100, 1));
  CHECK(pe->value <= analysis::delay_upper_bound(100, 1));
}

TEST_CASE("fair share grows with the business cost") {
  auto s = ExperimentSpec::defaults(ExperimentId::FairShare);
  s.q = {20};
  s.c_b = {1, 2, 10};
  s.b = {1};
  s.n_b = {1};
  s.repetitions = 3;
  s.fast = true;
  const auto rows = run_experiment_fairshare(s);
  const auto* fifo = find_row(rows, "FIFO", 20, 1, 0, "fair_share_business");
  REQUIRE(fifo);
  CHECK(fifo->value == doctest::Approx(1.0).epsilon(0.02));
  double prev = 0;
  for (double c : {1.0, 2.0, 10.0}) {
    const auto* r = find_row(rows, "PE", 20, c, 1, "fair_share_business");
    REQUIRE(r);
    CHECK(r->value >= prev);
    prev = r->value;
  }
  CHECK(prev > 1.2);
}

TEST_CASE("scheduling compositions stay within the band") {
  for (int de : {4, 8})
    for (int x = 0; x <= 4; ++x)
      for (int y = 0; x + y <= 4; ++y) {
        if (x + y == 0) continue;
        const Composition c{x, y, de, 8, 1, 4};
        const auto r = evaluate_composition(c, {1, 2, 3}, 40, 7);
        CHECK(r.none <= r.optimal);
        for (const auto& pe : r.pe) {
          CHECK(r.none <= pe.min);
          CHECK(pe.max <= r.optimal);
        }
      }
  const Composition c{2, 1, 4, 8, 1, 4};
  CHECK(c.label() == "E2B1");
  const auto jobs = c.jobs();
  REQUIRE(jobs.size() == 3);
  CHECK(jobs[2].weight == 4);
  CHECK(jobs[0].deadline == 4);
}

TEST_CASE("rows are deterministic and serialize") {
  auto s = ExperimentSpec::defaults(ExperimentId::Scheduling);
  s.max_packets = 3;
  s.repetitions = 10;
  std::ostringstream a, b;
  write_rows(a, run_experiment(s), OutputFormat::Csv);
  write_rows(b, run_experiment(s), OutputFormat::Csv);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("experiment,algorithm,q,c_b,b,n_b,metric,value,stddev,seeds\n", 0) == 0);

  const auto rows = run_experiment(s);
  std::ostringstream js;
  write_rows(js, rows, OutputFormat::Json);
  const auto parsed = nlohmann::json::parse(js.str());
  CHECK(parsed.size() == rows.size());
  CHECK(parsed[0]["experiment"] == "scheduling-compare");
}

TEST_CASE("config parsing") {
  const auto c = parse_economy_config(R"({
    "trading_periods": 2, "rounds": 100, "seed": 3,
    "flows": [
      {"name": "business", "v_max": 1000, "cost": 4, "policy": "buy_only"},
      {"name": "economy", "count": 9, "v_max": 500, "cost": 1, "d_max": 400, "policy": "sell_only"}
    ]})");
  CHECK(c.queue_size == 10);
  CHECK(c.flows.size() == 10);
  CHECK(c.flows[3].value.d_max == 400);
  CHECK(c.flows[9].id == 9);
  CHECK(c.trading_periods == 2);

  CHECK_THROWS_AS(parse_economy_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_economy_config(R"({"rounds": 5, "flows": [], "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_economy_config(R"({"rounds": 5, "flows": [{"v_max": 5}]})"), ConfigError);
  CHECK_THROWS_AS(parse_economy_config(R"({"rounds": "x", "flows": [{"v_max": 5, "cost": 1}]})"), ConfigError);
  CHECK_THROWS_AS(parse_economy_config(R"({"rounds": 5, "queue_size": 2, "flows": [{"v_max": 5, "cost": 1}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_economy_config(R"({"rounds": 5, "pairing": "magic", "flows": [{"v_max": 5, "cost": 1}]})"),
                  ConfigError);

  const auto teams = parse_economy_config(R"({
    "rounds": 50, "fiat": {"total_units": 10},
    "flows": [{"name": "business", "v_max": 400, "cost": 4, "policy": "buy_only"},
              {"name": "economy", "v_max": 200, "cost": 1, "d_max": 40, "policy": "sell_only"}],
    "teams": [{"business": 0, "economy": 1}]})");
  REQUIRE(teams.fiat);
  CHECK(teams.fiat->total_units == 10);
  CHECK(teams.teams.size() == 1);

  const auto spec = parse_experiment_spec(R"({"experiment": "fair-share", "q": [10], "repetitions": 3})");
  CHECK(spec.experiment == ExperimentId::FairShare);
  CHECK(spec.q == std::vector<int>{10});
  CHECK(spec.n_b == std::vector<int>{1, 5});
  CHECK_THROWS_AS(parse_experiment_spec(R"({"experiment": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_spec(R"({"experiment": "delay", "b": [0]})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_spec(R"({"experiment": "delay", "algorithms": ["SJF"]})"), ConfigError);

  const auto inst = parse_schedule_instance(R"({"jobs": [{"deadline": 3, "weight": 2, "flow": 1}]})");
  CHECK(inst.flow_weights.size() == 2);
  CHECK(inst.job_flow[0] == 1);
  CHECK_THROWS_AS(parse_schedule_instance(R"({"jobs": [{"deadline": 0, "weight": 2}]})"), ConfigError);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
  CHECK_THROWS_AS(read_file("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("report rows of a simulation") {
  auto c = delay_experiment_config(10, 4, 1, 1, 200, 2);
  Economy e(c);
  const auto rows = report_rows(e.config(), e.run());
  std::map<std::string, double> by_metric;
  for (const auto& r : rows) {
    by_metric[r.metric] = r.value;
    CHECK(r.c_b == 4);
    CHECK(r.n_b == 1);
  }
  CHECK(by_metric.count("mean_delay_business"));
  CHECK(by_metric.count("wealth_rate"));
  CHECK(by_metric["money_total"] == 0);
  CHECK(by_metric["delivered_business"] + by_metric["delivered_economy"] >= 200);
}
