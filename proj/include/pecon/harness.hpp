#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pecon/economy.hpp"
#include "pecon/parallel.hpp"
#include "pecon/schedulers.hpp"

namespace pecon::harness {

enum class ExperimentId { Delay, FairShare, WealthExample, Scheduling };

ExperimentId parse_experiment(const std::string& s);
std::string to_string(ExperimentId id);

struct ExperimentSpec {
  ExperimentId experiment = ExperimentId::Delay;
  std::vector<int> q;
  std::vector<double> c_b;
  std::vector<int> b;
  std::vector<int> n_b;
  std::vector<std::string> algorithms;  // subset of PE, FIFO, WF2Q
  int repetitions = 1;                  // seeds per cell
  std::uint64_t seed = 1;
  bool fast = false;  // 20q instead of 100q deliveries per run

  // Wealth example: measured rounds of the b = 1 runs and the saturated runs.
  std::int64_t wealth_rounds = 100000;
  int saturated_periods = 1000;
  std::int64_t saturated_rounds = 4000;
  std::int64_t saturated_warmup = 1200;

  // Scheduling comparison: compositions ExBy with 1 <= x + y <= max_packets.
  int max_packets = 10;
  std::vector<int> economy_deadlines;
  int business_deadline = 8;

  Execution execution = Execution::Parallel;

  /// Grid defaults for each experiment.
  static ExperimentSpec defaults(ExperimentId id);
  void validate() const;
  std::int64_t deliveries_per_run(int q) const { return static_cast<std::int64_t>(fast ? 20 : 100) * q; }
};

struct ResultRow {
  std::string experiment;
  std::string algorithm;  // PE, FIFO, WF2Q, OPT, NONE
  int q = 0;
  double c_b = 0;
  int b = 0;
  int n_b = 0;
  std::string metric;
  double value = 0;
  double stddev = 0;
  int seeds = 0;
};

/// lambda = (a_i / sum a) * (q / w_i). Throws std::domain_error on an empty run.
double fair_share_ratio(std::int64_t delivered_i, std::int64_t delivered_total, int window_i, int q);

/// Deterministic per-run seed from (master, cell, repetition).
std::uint64_t cell_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t repetition);

/// One business flow of window n_b among q - n_b window-1 economy flows,
/// V_e = 4q, c_e = 1, V_b = 4q c_b. Warm-up 4q rounds.
EconomyConfig delay_experiment_config(int q, double c_b, int b, int n_b, std::int64_t deliveries, std::uint64_t seed);

/// The worked example: Q = 100, V_e = 500, c_e = 1, V_b = 1000, c_b = 4, d_cap = 400,
/// n_b business flows of window 1.
EconomyConfig wealth_example_config(int n_b, int b, std::int64_t measured_rounds, std::int64_t warmup,
                                    std::uint64_t seed);

/// Queue of x economy packets followed by y business packets (value c * deadline).
struct Composition {
  int economy = 0;
  int business = 0;
  Rounds economy_deadline = 4;
  Rounds business_deadline = 8;
  std::int64_t economy_cost = 1;
  std::int64_t business_cost = 4;

  std::string label() const;
  std::vector<sched::Job> jobs() const;
  EconomyConfig economy_config(int b, std::uint64_t seed) const;
};

struct CompositionResult {
  std::int64_t none = 0;     // no scheduling: queue order
  std::int64_t optimal = 0;  // assignment optimum
  struct PerB {
    int b = 0;
    double mean = 0;
    double stddev = 0;
    std::int64_t min = 0;
    std::int64_t max = 0;
  };
  std::vector<PerB> pe;
};

/// Utility of one PE run on the composition, in whole money units.
std::int64_t composition_pe_utility(const Composition& c, int b, std::uint64_t seed);
CompositionResult evaluate_composition(const Composition& c, const std::vector<int>& b_values, int seeds,
                                       std::uint64_t master_seed);

std::vector<ResultRow> run_experiment_delay(const ExperimentSpec& spec);
std::vector<ResultRow> run_experiment_fairshare(const ExperimentSpec& spec);
std::vector<ResultRow> run_wealth_example(const ExperimentSpec& spec);
std::vector<ResultRow> run_experiment_scheduling(const ExperimentSpec& spec);
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

/// Rows describing a single simulation.
std::vector<ResultRow> report_rows(const EconomyConfig& config, const SimulationReport& report);

// ---- Files ----

EconomyConfig parse_economy_config(std::string_view json_text);
ExperimentSpec parse_experiment_spec(std::string_view json_text);

struct ScheduleInstance {
  std::vector<sched::Job> jobs;
  std::vector<std::size_t> job_flow;  // flow of each job for fifo/wf2q
  std::vector<double> flow_weights;
};
ScheduleInstance parse_schedule_instance(std::string_view json_text);

std::string read_file(const std::string& path);

enum class OutputFormat { Csv, Json };
OutputFormat parse_format(const std::string& s);
void write_rows(std::ostream& os, const std::vector<ResultRow>& rows, OutputFormat format);

}  // namespace pecon::harness
