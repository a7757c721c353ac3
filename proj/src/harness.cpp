#include "pecon/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pecon/analysis.hpp"

namespace pecon::harness {

using nlohmann::json;

ExperimentId parse_experiment(const std::string& s) {
  if (s == "delay" || s == "delay-vs-q") return ExperimentId::Delay;
  if (s == "fair-share" || s == "fairshare") return ExperimentId::FairShare;
  if (s == "wealth-example" || s == "wealth") return ExperimentId::WealthExample;
  if (s == "scheduling-compare" || s == "scheduling") return ExperimentId::Scheduling;
  throw ConfigError("unknown experiment '" + s + "'");
}

std::string to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::Delay: return "delay-vs-q";
    case ExperimentId::FairShare: return "fair-share";
    case ExperimentId::WealthExample: return "wealth-example";
    case ExperimentId::Scheduling: return "scheduling-compare";
  }
  return "?";
}

ExperimentSpec ExperimentSpec::defaults(ExperimentId id) {
  ExperimentSpec s;
  s.experiment = id;
  switch (id) {
    case ExperimentId::Delay:
    case ExperimentId::FairShare:
      s.q = {10, 20, 50, 100, 200, 500, 1000};
      s.c_b = {1, 2, 10, 100};
      s.b = {1, 10, 20};
      s.n_b = id == ExperimentId::Delay ? std::vector<int>{1} : std::vector<int>{1, 5};
      s.algorithms = {"PE", "FIFO", "WF2Q"};
      break;
    case ExperimentId::WealthExample:
      s.q = {100};
      s.c_b = {4};
      s.b = {1};
      s.n_b = {1, 5};
      s.algorithms = {"PE"};
      break;
    case ExperimentId::Scheduling:
      s.q = {};
      s.c_b = {4};
      s.b = {1, 2, 3};
      s.n_b = {};
      s.algorithms = {"PE"};
      s.repetitions = 1000;
      s.economy_deadlines = {4, 8};
      break;
  }
  return s;
}

void ExperimentSpec::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (b.empty()) throw ConfigError("the b grid is empty");
  for (int v : b)
    if (v < 1) throw ConfigError("trading periods must be at least 1");
  for (const auto& a : algorithms)
    if (a != "PE" && a != "FIFO" && a != "WF2Q") throw ConfigError("unknown algorithm '" + a + "'");
  switch (experiment) {
    case ExperimentId::Delay:
    case ExperimentId::FairShare:
      if (q.empty() || c_b.empty() || n_b.empty() || algorithms.empty()) throw ConfigError("experiment grids must be non-empty");
      for (int v : q)
        if (v < 3) throw ConfigError("queue sizes must be at least 3");
      for (double v : c_b)
        if (!(v >= 1)) throw ConfigError("c_b must be at least 1");
      for (int v : n_b)
        if (v < 1) throw ConfigError("n_b must be at least 1");
      break;
    case ExperimentId::WealthExample:
      if (n_b.empty()) throw ConfigError("the n_b grid is empty");
      for (int v : n_b)
        if (v < 1 || v >= 100) throw ConfigError("n_b must lie in [1, 99]");
      if (wealth_rounds < 1 || saturated_rounds < 1 || saturated_periods < 1 || saturated_warmup < 0)
        throw ConfigError("wealth example run lengths must be positive");
      break;
    case ExperimentId::Scheduling:
      if (max_packets < 1) throw ConfigError("max_packets must be at least 1");
      if (economy_deadlines.empty()) throw ConfigError("economy_deadlines is empty");
      for (int d : economy_deadlines)
        if (d < 1) throw ConfigError("deadlines must be at least 1");
      if (business_deadline < 1) throw ConfigError("deadlines must be at least 1");
      if (c_b.size() != 1 || !(c_b[0] >= 1) || c_b[0] != std::floor(c_b[0]))
        throw ConfigError("the scheduling comparison takes one integer business cost");
      break;
  }
}

double fair_share_ratio(std::int64_t delivered_i, std::int64_t delivered_total, int window_i, int q) {
  if (delivered_total <= 0) throw std::domain_error("fair_share_ratio: no packets delivered");
  if (window_i < 1 || q < 1) throw std::domain_error("fair_share_ratio: window and q must be positive");
  const double share = static_cast<double>(delivered_i) / static_cast<double>(delivered_total);
  return share * static_cast<double>(q) / window_i;
}

std::uint64_t cell_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t repetition) {
  CounterRng r = CounterRng(master).split(cell).split(repetition);
  return r();
}

EconomyConfig delay_experiment_config(int q, double c_b, int b, int n_b, std::int64_t deliveries, std::uint64_t seed) {
  if (n_b < 1 || n_b >= q) throw ConfigError("n_b must lie in [1, q - 1]");
  EconomyConfig c;
  c.queue_size = static_cast<std::size_t>(q);
  c.trading_periods = b;
  c.deliveries = deliveries;
  c.warmup_rounds = 4 * static_cast<std::int64_t>(q);
  c.seed = seed;
  const Money v_e = Money::units(4 * static_cast<std::int64_t>(q));
  const auto economy = ValueFunction::make(v_e, Money::units(1));
  const auto business = ValueFunction::make(Money::from_double(4.0 * q * c_b), Money::from_double(c_b));
  c.flows.push_back({0, "business", FlowKind::WindowBased, n_b, 0.0, business, {TradeMode::BuyOnly, std::nullopt}});
  for (int i = 0; i < q - n_b; ++i)
    c.flows.push_back({0, "economy", FlowKind::WindowBased, 1, 0.0, economy, {TradeMode::SellOnly, std::nullopt}});
  return c;
}

EconomyConfig wealth_example_config(int n_b, int b, std::int64_t measured_rounds, std::int64_t warmup,
                                    std::uint64_t seed) {
  constexpr int kQ = 100;
  constexpr Rounds kDelayCap = 4 * kQ;
  if (n_b < 1 || n_b >= kQ) throw ConfigError("n_b must lie in [1, 99]");
  EconomyConfig c;
  c.queue_size = kQ;
  c.trading_periods = b;
  c.rounds = warmup + measured_rounds;
  c.warmup_rounds = warmup;
  c.seed = seed;
  auto economy = ValueFunction::make(Money::units(500), Money::units(1));
  auto business = ValueFunction::make(Money::units(1000), Money::units(4));
  economy.d_max = std::min(economy.d_max, kDelayCap);
  business.d_max = std::min(business.d_max, kDelayCap);
  for (int i = 0; i < n_b; ++i)
    c.flows.push_back({0, "business", FlowKind::WindowBased, 1, 0.0, business, {TradeMode::BuyOnly, std::nullopt}});
  for (int i = 0; i < kQ - n_b; ++i)
    c.flows.push_back({0, "economy", FlowKind::WindowBased, 1, 0.0, economy, {TradeMode::SellOnly, std::nullopt}});
  return c;
}

std::string Composition::label() const {
  return "E" + std::to_string(economy) + "B" + std::to_string(business);
}

std::vector<sched::Job> Composition::jobs() const {
  std::vector<sched::Job> out;
  for (int i = 0; i < economy + business; ++i) {
    const bool is_economy = i < economy;
    out.push_back({i, 0, is_economy ? economy_deadline : business_deadline, is_economy ? economy_cost : business_cost});
  }
  return out;
}

EconomyConfig Composition::economy_config(int b, std::uint64_t seed) const {
  EconomyConfig c;
  c.queue_size = static_cast<std::size_t>(economy + business);
  c.trading_periods = b;
  c.seed = seed;
  c.replacement = Replacement::Drain;
  c.pairing = PairingMode::Direct;
  c.shuffle_initial = false;
  const auto econ = ValueFunction::make(Money::units(economy_cost * economy_deadline), Money::units(economy_cost),
                                        economy_deadline);
  const auto biz = ValueFunction::make(Money::units(business_cost * business_deadline), Money::units(business_cost),
                                       business_deadline);
  for (int i = 0; i < economy; ++i)
    c.flows.push_back({0, "economy", FlowKind::RateBased, 1, 1.0, econ, {TradeMode::AlwaysTrade, std::nullopt}});
  for (int i = 0; i < business; ++i)
    c.flows.push_back({0, "business", FlowKind::RateBased, 1, 1.0, biz, {TradeMode::AlwaysTrade, std::nullopt}});
  return c;
}

std::int64_t composition_pe_utility(const Composition& c, int b, std::uint64_t seed) {
  Economy e(c.economy_config(b, seed));
  const SimulationReport r = e.run();
  return std::llround(r.total_value);
}

CompositionResult evaluate_composition(const Composition& c, const std::vector<int>& b_values, int seeds,
                                       std::uint64_t master_seed) {
  const auto jobs = c.jobs();
  CompositionResult out;
  out.none = sched::total_wealth(jobs, sched::fifo_jobs(jobs));
  out.optimal = sched::total_wealth(jobs, sched::mtw_optimal(jobs));
  for (int b : b_values) {
    CompositionResult::PerB r;
    r.b = b;
    double sum = 0;
    double sq = 0;
    r.min = std::numeric_limits<std::int64_t>::max();
    r.max = std::numeric_limits<std::int64_t>::min();
    for (int s = 0; s < seeds; ++s) {
      // The same seed for every b, so the first trading period is shared.
      const auto u = composition_pe_utility(c, b, cell_seed(master_seed, 0, static_cast<std::uint64_t>(s)));
      sum += static_cast<double>(u);
      sq += static_cast<double>(u) * static_cast<double>(u);
      r.min = std::min(r.min, u);
      r.max = std::max(r.max, u);
    }
    r.mean = sum / seeds;
    r.stddev = seeds > 1 ? std::sqrt(std::max(0.0, (sq - sum * sum / seeds) / (seeds - 1))) : 0.0;
    out.pe.push_back(r);
  }
  return out;
}

namespace {

struct DelaySample {
  std::int64_t business = 0;
  std::int64_t total = 0;
  double business_sum = 0;
  double business_sq = 0;
  std::int64_t economy = 0;
  double economy_sum = 0;
  double economy_sq = 0;
};

struct DelayCell {
  std::string algorithm;
  int q = 0;
  double c_b = 0;
  int b = 0;  // 0 for the schedulers that ignore trading periods
  int n_b = 0;
  int repetitions = 1;
};

DelaySample run_delay_sample(const DelayCell& cell, const ExperimentSpec& spec, std::uint64_t seed) {
  DelaySample s;
  const std::int64_t deliveries = spec.deliveries_per_run(cell.q);
  if (cell.algorithm == "PE") {
    Economy e(delay_experiment_config(cell.q, cell.c_b, cell.b, cell.n_b, deliveries, seed));
    const auto r = e.run();
    for (const auto& f : r.flows) {
      s.total += f.delivered;
      if (f.name == "business") {
        s.business += f.delivered;
        s.business_sum += f.delay_sum;
        s.business_sq += f.delay_sq_sum;
      } else {
        s.economy += f.delivered;
        s.economy_sum += f.delay_sum;
        s.economy_sq += f.delay_sq_sum;
      }
    }
    return s;
  }
  std::vector<sched::WindowFlow> flows{{"business", cell.n_b, cell.c_b}};
  for (int i = 0; i < cell.q - cell.n_b; ++i) flows.push_back({"economy", 1, 1.0});
  const std::int64_t warmup = 4 * static_cast<std::int64_t>(cell.q);
  const auto stats = sched::simulate_window_flows(flows, sched::parse_discipline(cell.algorithm == "FIFO" ? "fifo" : "wf2q"),
                                                  warmup + deliveries, warmup);
  for (const auto& f : stats) {
    s.total += f.delivered;
    if (f.name == "business") {
      s.business += f.delivered;
      s.business_sum += f.delay_sum;
      s.business_sq += f.delay_sq_sum;
    } else {
      s.economy += f.delivered;
      s.economy_sum += f.delay_sum;
      s.economy_sq += f.delay_sq_sum;
    }
  }
  return s;
}

double pooled_mean(double sum, std::int64_t n) { return n > 0 ? sum / static_cast<double>(n) : 0.0; }

double pooled_sd(double sum, double sq, std::int64_t n) {
  if (n < 2) return 0.0;
  const double dn = static_cast<double>(n);
  return std::sqrt(std::max(0.0, (sq - sum * sum / dn) / (dn - 1)));
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::vector<DelayCell> delay_cells(const ExperimentSpec& spec) {
  std::vector<DelayCell> cells;
  for (int q : spec.q)
    for (int n_b : spec.n_b) {
      if (n_b >= q) continue;
      for (double c_b : spec.c_b)
        for (const auto& alg : spec.algorithms) {
          if (alg == "PE") {
            for (int b : spec.b) cells.push_back({alg, q, c_b, b, n_b, spec.repetitions});
          } else {
            cells.push_back({alg, q, c_b, 0, n_b, 1});  // deterministic
          }
        }
    }
  return cells;
}

// Runs every (cell, repetition) and returns the samples grouped by cell.
std::vector<std::vector<DelaySample>> run_delay_cells(const std::vector<DelayCell>& cells, const ExperimentSpec& spec) {
  std::vector<std::pair<std::size_t, int>> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int r = 0; r < cells[c].repetitions; ++r) tasks.emplace_back(c, r);
  const auto samples = map_cells(
      tasks.size(),
      [&](std::size_t t) {
        const auto [c, r] = tasks[t];
        return run_delay_sample(cells[c], spec, cell_seed(spec.seed, c, static_cast<std::uint64_t>(r)));
      },
      spec.execution);
  std::vector<std::vector<DelaySample>> grouped(cells.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) grouped[tasks[t].first].push_back(samples[t]);
  return grouped;
}

ResultRow make_row(const ExperimentSpec& spec, const DelayCell& cell, std::string metric, double value, double sd,
                   int seeds) {
  return {to_string(spec.experiment), cell.algorithm, cell.q, cell.c_b, cell.b, cell.n_b, std::move(metric), value, sd,
          seeds};
}

// Least-squares slope of log(delay) against log(q) per curve.
void append_slopes(const ExperimentSpec& spec, std::vector<ResultRow>& rows) {
  std::map<std::tuple<std::string, double, int, int>, std::vector<std::pair<double, double>>> curves;
  for (const auto& r : rows)
    if (r.metric == "mean_delay_business" && r.value > 0)
      curves[{r.algorithm, r.c_b, r.b, r.n_b}].emplace_back(std::log(r.q), std::log(r.value));
  for (const auto& [key, pts] : curves) {
    if (pts.size() < 2) continue;
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    if (sxx <= 0) continue;
    const auto& [alg, c_b, b, n_b] = key;
    rows.push_back({to_string(spec.experiment), alg, 0, c_b, b, n_b, "loglog_slope_business_delay", sxy / sxx, 0,
                    static_cast<int>(pts.size())});
  }
}

}  // namespace

std::vector<ResultRow> run_experiment_delay(const ExperimentSpec& spec) {
  spec.validate();
  const auto cells = delay_cells(spec);
  const auto grouped = run_delay_cells(cells, spec);
  std::vector<ResultRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    DelaySample acc;
    for (const auto& s : grouped[c]) {
      acc.business += s.business;
      acc.business_sum += s.business_sum;
      acc.business_sq += s.business_sq;
      acc.economy += s.economy;
      acc.economy_sum += s.economy_sum;
      acc.economy_sq += s.economy_sq;
    }
    const int seeds = static_cast<int>(grouped[c].size());
    rows.push_back(make_row(spec, cells[c], "mean_delay_business", pooled_mean(acc.business_sum, acc.business),
                            pooled_sd(acc.business_sum, acc.business_sq, acc.business), seeds));
    rows.push_back(make_row(spec, cells[c], "mean_delay_economy", pooled_mean(acc.economy_sum, acc.economy),
                            pooled_sd(acc.economy_sum, acc.economy_sq, acc.economy), seeds));
  }
  // Closed-form delay bounds next to the PE curves.
  if (std::find(spec.algorithms.begin(), spec.algorithms.end(), "PE") != spec.algorithms.end()) {
    for (int q : spec.q)
      for (int b : spec.b) {
        const auto bounds = analysis::delay_bounds(q, b);
        const std::string exp = to_string(spec.experiment);
        rows.push_back({exp, "PE", q, 0, b, 1, "delay_bound_lower", bounds.lower, 0, 0});
        rows.push_back({exp, "PE", q, 0, b, 1, "delay_bound_upper", bounds.upper, 0, 0});
        if (b == 1) rows.push_back({exp, "PE", q, 0, b, 1, "delay_exact", analysis::exact_expected_delay(q), 0, 0});
      }
  }
  append_slopes(spec, rows);
  return rows;
}

std::vector<ResultRow> run_experiment_fairshare(const ExperimentSpec& spec) {
  spec.validate();
  const auto cells = delay_cells(spec);
  const auto grouped = run_delay_cells(cells, spec);
  std::vector<ResultRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> lambdas;
    for (const auto& s : grouped[c]) lambdas.push_back(fair_share_ratio(s.business, s.total, cells[c].n_b, cells[c].q));
    const double mean = std::accumulate(lambdas.begin(), lambdas.end(), 0.0) / static_cast<double>(lambdas.size());
    rows.push_back(make_row(spec, cells[c], "fair_share_business", mean, sample_sd(lambdas),
                            static_cast<int>(lambdas.size())));
  }
  return rows;
}

std::vector<ResultRow> run_wealth_example(const ExperimentSpec& spec) {
  spec.validate();
  const std::string exp = to_string(spec.experiment);
  constexpr int kQ = 100;

  struct Task {
    int n_b;
    int b;
    bool saturated;
    int rep;
  };
  std::vector<Task> tasks;
  for (int n_b : spec.n_b) {
    for (int b : spec.b)
      for (int r = 0; r < spec.repetitions; ++r) tasks.push_back({n_b, b, false, r});
    for (int r = 0; r < spec.repetitions; ++r) tasks.push_back({n_b, spec.saturated_periods, true, r});
  }
  const auto reports = map_cells(
      tasks.size(),
      [&](std::size_t i) {
        const Task& t = tasks[i];
        const std::int64_t rounds = t.saturated ? spec.saturated_rounds : spec.wealth_rounds;
        const std::int64_t warmup = t.saturated ? spec.saturated_warmup : 4 * kQ;
        return run_scenario1(
            wealth_example_config(t.n_b, t.b, rounds, warmup, cell_seed(spec.seed, i, 0)));
      },
      spec.execution);

  std::vector<ResultRow> rows;
  for (int n_b : spec.n_b) {
    const auto p = analysis::WealthScenarioParams::make(kQ - n_b, n_b, 500, 1000, 1, 4, 4.0 * kQ);
    rows.push_back({exp, "NONE", kQ, 4, 0, n_b, "wealth_no_trades", analysis::wealth_no_trades(p), 0, 0});
    rows.push_back({exp, "OPT", kQ, 4, 0, n_b, "wealth_ideal", analysis::wealth_ideal(p), 0, 0});
    try {
      rows.push_back({exp, "OPT", kQ, 4, 0, n_b, "wealth_ideal_feasible", analysis::wealth_ideal_feasible(p), 0, 0});
    } catch (const std::domain_error&) {
      // Five business packets cannot all run at delay 2; no feasible-ideal row.
    }

    std::vector<std::pair<int, bool>> series;
    for (int b : spec.b) series.emplace_back(b, false);
    series.emplace_back(spec.saturated_periods, true);
    for (const auto& [b, saturated] : series) {
      std::vector<double> wealth;
      double bs = 0, bq = 0, es = 0, eq = 0;
      std::int64_t bn = 0, en = 0;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].n_b != n_b || tasks[i].b != b || tasks[i].saturated != saturated) continue;
        wealth.push_back(reports[i].wealth_rate);
        for (const auto& f : reports[i].flows) {
          if (f.name == "business") {
            bn += f.delivered;
            bs += f.delay_sum;
            bq += f.delay_sq_sum;
          } else {
            en += f.delivered;
            es += f.delay_sum;
            eq += f.delay_sq_sum;
          }
        }
      }
      const int seeds = static_cast<int>(wealth.size());
      const double mean = std::accumulate(wealth.begin(), wealth.end(), 0.0) / seeds;
      rows.push_back({exp, "PE", kQ, 4, b, n_b, saturated ? "wealth_rate_saturated" : "wealth_rate", mean,
                      sample_sd(wealth), seeds});
      rows.push_back({exp, "PE", kQ, 4, b, n_b, "mean_delay_business", pooled_mean(bs, bn), pooled_sd(bs, bq, bn), seeds});
      rows.push_back({exp, "PE", kQ, 4, b, n_b, "mean_delay_economy", pooled_mean(es, en), pooled_sd(es, eq, en), seeds});
    }
  }
  return rows;
}

std::vector<ResultRow> run_experiment_scheduling(const ExperimentSpec& spec) {
  spec.validate();
  const std::string exp = to_string(spec.experiment);
  const auto business_cost = static_cast<std::int64_t>(spec.c_b[0]);
  std::vector<Composition> comps;
  for (int de : spec.economy_deadlines)
    for (int total = 1; total <= spec.max_packets; ++total)
      for (int y = 0; y <= total; ++y)
        comps.push_back({total - y, y, de, spec.business_deadline, 1, business_cost});

  const auto results = map_cells(
      comps.size(),
      [&](std::size_t i) { return evaluate_composition(comps[i], spec.b, spec.repetitions, cell_seed(spec.seed, i, 0)); },
      spec.execution);

  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    const auto& r = results[i];
    const int q = c.economy + c.business;
    const double cb = static_cast<double>(c.business_cost);
    const std::string suffix = "_de" + std::to_string(c.economy_deadline);
    rows.push_back({exp, "NONE", q, cb, 0, c.business, "utility" + suffix, static_cast<double>(r.none), 0, 1});
    rows.push_back({exp, "OPT", q, cb, 0, c.business, "utility" + suffix, static_cast<double>(r.optimal), 0, 1});
    for (const auto& pe : r.pe) {
      rows.push_back({exp, "PE", q, cb, pe.b, c.business, "utility" + suffix, pe.mean, pe.stddev, spec.repetitions});
      if (r.optimal > r.none) {
        const double norm = (pe.mean - static_cast<double>(r.none)) / static_cast<double>(r.optimal - r.none);
        rows.push_back({exp, "PE", q, cb, pe.b, c.business, "normalized_utility" + suffix, norm,
                        pe.stddev / static_cast<double>(r.optimal - r.none), spec.repetitions});
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  switch (spec.experiment) {
    case ExperimentId::Delay: return run_experiment_delay(spec);
    case ExperimentId::FairShare: return run_experiment_fairshare(spec);
    case ExperimentId::WealthExample: return run_wealth_example(spec);
    case ExperimentId::Scheduling: return run_experiment_scheduling(spec);
  }
  return {};
}

std::vector<ResultRow> report_rows(const EconomyConfig& config, const SimulationReport& report) {
  double c_b = 0;
  int n_b = 0;
  for (const auto& f : config.flows) {
    if (f.name != "business") continue;
    if (n_b == 0) c_b = f.value.cost.to_double();
    n_b += f.window;
  }
  const int q = static_cast<int>(config.queue_size);
  const int b = config.trading_periods;
  std::vector<ResultRow> rows;
  auto add = [&](std::string metric, double value, double sd = 0) {
    rows.push_back({"simulate", "PE", q, c_b, b, n_b, std::move(metric), value, sd, 1});
  };
  for (const auto& g : report.groups()) {
    add("mean_delay_" + g.name, g.mean_delay, g.stddev_delay);
    add("delivered_" + g.name, static_cast<double>(g.delivered));
  }
  add("wealth_rate", report.wealth_rate);
  add("trades", static_cast<double>(report.trades));
  add("measured_rounds", static_cast<double>(report.measured_rounds));
  add("failures", static_cast<double>(report.failures));
  add("zero_state_events", static_cast<double>(report.zero_state_events));
  if (config.fiat) {
    add("fiat_total", static_cast<double>(report.fiat_total));
    add("team_failures", static_cast<double>(report.team_failures));
    add("redistributions", static_cast<double>(report.redistributions));
  } else {
    add("money_total", report.money_total.to_double());
  }
  return rows;
}

// ---- Files ----

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return get_or<T>(obj, key, T{});
}

Money money_value(const json& obj, const char* key, const std::string& where) {
  const double v = require<double>(obj, key, where);
  try {
    return Money::from_double(v);
  } catch (const std::exception& e) {
    throw ConfigError(where + ": '" + key + "' " + e.what());
  }
}

}  // namespace

EconomyConfig parse_economy_config(std::string_view json_text) {
  const json j = parse_json(json_text);
  check_keys(j,
             {"queue_size", "trading_periods", "failure_probability", "rounds", "deliveries", "warmup_rounds", "seed",
              "pairing", "replacement", "shuffle_initial", "record_series", "bounds", "flows", "fiat", "teams"},
             "config");
  EconomyConfig c;
  c.trading_periods = get_or<int>(j, "trading_periods", 1);
  c.failure_probability = get_or<double>(j, "failure_probability", 0.0);
  c.rounds = get_or<std::int64_t>(j, "rounds", 0);
  c.deliveries = get_or<std::int64_t>(j, "deliveries", 0);
  c.warmup_rounds = get_or<std::int64_t>(j, "warmup_rounds", 0);
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  c.shuffle_initial = get_or<bool>(j, "shuffle_initial", true);
  c.record_series = get_or<bool>(j, "record_series", false);

  const auto pairing = get_or<std::string>(j, "pairing", "pipelined");
  if (pairing == "pipelined") {
    c.pairing = PairingMode::Pipelined;
  } else if (pairing == "direct") {
    c.pairing = PairingMode::Direct;
  } else {
    throw ConfigError("pairing must be 'pipelined' or 'direct'");
  }
  const auto replacement = get_or<std::string>(j, "replacement", "immediate");
  if (replacement == "immediate") {
    c.replacement = Replacement::Immediate;
  } else if (replacement == "drain") {
    c.replacement = Replacement::Drain;
  } else {
    throw ConfigError("replacement must be 'immediate' or 'drain'");
  }

  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    check_keys(b, {"account_min", "account_max", "delay_max"}, "bounds");
    if (b.contains("account_min")) c.bounds.account_min = money_value(b, "account_min", "bounds");
    if (b.contains("account_max")) c.bounds.account_max = money_value(b, "account_max", "bounds");
    c.bounds.delay_max = get_or<Rounds>(b, "delay_max", kUnboundedDelay);
  }

  if (!j.contains("flows") || !j.at("flows").is_array()) throw ConfigError("config: 'flows' must be an array");
  for (const json& f : j.at("flows")) {
    check_keys(f, {"name", "count", "kind", "window", "rate", "v_max", "cost", "d_max", "policy", "sell_one_in"}, "flow");
    FlowSpec spec;
    spec.name = get_or<std::string>(f, "name", "flow");
    spec.kind = parse_flow_kind(get_or<std::string>(f, "kind", "window"));
    spec.window = get_or<int>(f, "window", 1);
    spec.rate = get_or<double>(f, "rate", 0.0);
    const std::string where = "flow '" + spec.name + "'";
    std::optional<Rounds> d_max;
    if (f.contains("d_max") && !f.at("d_max").is_null()) d_max = get_or<Rounds>(f, "d_max", 0);
    spec.value = ValueFunction::make(money_value(f, "v_max", where), money_value(f, "cost", where), d_max);
    spec.policy.mode = parse_trade_mode(get_or<std::string>(f, "policy", "always"));
    if (f.contains("sell_one_in") && !f.at("sell_one_in").is_null()) spec.policy.sell_one_in = get_or<int>(f, "sell_one_in", 1);
    const int count = get_or<int>(f, "count", 1);
    if (count < 1) throw ConfigError(where + ": count must be at least 1");
    for (int i = 0; i < count; ++i) c.flows.push_back(spec);
  }
  std::size_t in_flight = 0;
  for (const auto& f : c.flows) in_flight += static_cast<std::size_t>(std::max(f.window, 0));
  c.queue_size = get_or<std::size_t>(j, "queue_size", in_flight);

  if (j.contains("fiat")) {
    const json& f = j.at("fiat");
    check_keys(f, {"total_units", "deposit_cap", "packet_cap"}, "fiat");
    FiatConfig fiat;
    fiat.total_units = require<std::int64_t>(f, "total_units", "fiat");
    fiat.deposit_cap = get_or<std::int64_t>(f, "deposit_cap", fiat.deposit_cap);
    fiat.packet_cap = get_or<std::int64_t>(f, "packet_cap", fiat.packet_cap);
    c.fiat = fiat;
  }
  if (j.contains("teams")) {
    if (!j.at("teams").is_array()) throw ConfigError("config: 'teams' must be an array");
    for (const json& t : j.at("teams")) {
      check_keys(t, {"business", "economy"}, "team");
      c.teams.push_back({require<FlowId>(t, "business", "team"), require<FlowId>(t, "economy", "team")});
    }
  }
  for (std::size_t i = 0; i < c.flows.size(); ++i) c.flows[i].id = static_cast<FlowId>(i);
  c.validate();
  return c;
}

ExperimentSpec parse_experiment_spec(std::string_view json_text) {
  const json j = parse_json(json_text);
  check_keys(j,
             {"experiment", "q", "c_b", "b", "n_b", "algorithms", "repetitions", "seed", "fast", "wealth_rounds",
              "saturated_periods", "saturated_rounds", "saturated_warmup", "max_packets", "economy_deadlines",
              "business_deadline", "execution"},
             "spec");
  ExperimentSpec s = ExperimentSpec::defaults(parse_experiment(require<std::string>(j, "experiment", "spec")));
  s.q = get_or(j, "q", s.q);
  s.c_b = get_or(j, "c_b", s.c_b);
  s.b = get_or(j, "b", s.b);
  s.n_b = get_or(j, "n_b", s.n_b);
  s.algorithms = get_or(j, "algorithms", s.algorithms);
  s.repetitions = get_or(j, "repetitions", s.repetitions);
  s.seed = get_or(j, "seed", s.seed);
  s.fast = get_or(j, "fast", s.fast);
  s.wealth_rounds = get_or(j, "wealth_rounds", s.wealth_rounds);
  s.saturated_periods = get_or(j, "saturated_periods", s.saturated_periods);
  s.saturated_rounds = get_or(j, "saturated_rounds", s.saturated_rounds);
  s.saturated_warmup = get_or(j, "saturated_warmup", s.saturated_warmup);
  s.max_packets = get_or(j, "max_packets", s.max_packets);
  s.economy_deadlines = get_or(j, "economy_deadlines", s.economy_deadlines);
  s.business_deadline = get_or(j, "business_deadline", s.business_deadline);
  const auto exec = get_or<std::string>(j, "execution", "parallel");
  if (exec == "parallel") {
    s.execution = Execution::Parallel;
  } else if (exec == "serial") {
    s.execution = Execution::Serial;
  } else {
    throw ConfigError("execution must be 'parallel' or 'serial'");
  }
  s.validate();
  return s;
}

ScheduleInstance parse_schedule_instance(std::string_view json_text) {
  const json j = parse_json(json_text);
  check_keys(j, {"jobs", "flow_weights"}, "instance");
  if (!j.contains("jobs") || !j.at("jobs").is_array()) throw ConfigError("instance: 'jobs' must be an array");
  ScheduleInstance inst;
  std::size_t flows = 1;
  int next_id = 0;
  for (const json& o : j.at("jobs")) {
    check_keys(o, {"id", "release", "deadline", "weight", "flow"}, "job");
    sched::Job job;
    job.id = get_or<int>(o, "id", next_id);
    next_id = job.id + 1;
    job.release = get_or<Rounds>(o, "release", 0);
    job.deadline = require<Rounds>(o, "deadline", "job");
    job.weight = require<std::int64_t>(o, "weight", "job");
    const auto flow = get_or<std::size_t>(o, "flow", 0);
    flows = std::max(flows, flow + 1);
    inst.jobs.push_back(job);
    inst.job_flow.push_back(flow);
  }
  sched::validate_jobs(inst.jobs);
  inst.flow_weights = get_or(j, "flow_weights", std::vector<double>(flows, 1.0));
  if (inst.flow_weights.size() < flows) throw ConfigError("instance: flow_weights does not cover every flow");
  for (double w : inst.flow_weights)
    if (!(w > 0)) throw ConfigError("instance: flow weights must be positive");
  return inst;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("format must be 'csv' or 'json'");
}

namespace {

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_rows(std::ostream& os, const std::vector<ResultRow>& rows, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    os << "experiment,algorithm,q,c_b,b,n_b,metric,value,stddev,seeds\n";
    for (const auto& r : rows)
      os << r.experiment << ',' << r.algorithm << ',' << r.q << ',' << number(r.c_b) << ',' << r.b << ',' << r.n_b
         << ',' << r.metric << ',' << number(r.value) << ',' << number(r.stddev) << ',' << r.seeds << '\n';
    return;
  }
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"experiment", r.experiment},
                   {"algorithm", r.algorithm},
                   {"q", r.q},
                   {"c_b", r.c_b},
                   {"b", r.b},
                   {"n_b", r.n_b},
                   {"metric", r.metric},
                   {"value", r.value},
                   {"stddev", r.stddev},
                   {"seeds", r.seeds}});
  os << out.dump(2) << '\n';
}

}  // namespace pecon::harness
