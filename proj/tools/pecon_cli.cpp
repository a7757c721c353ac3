// Command-line front end: simulate, experiment, bounds, schedule.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pecon/analysis.hpp"
#include "pecon/economy.hpp"
#include "pecon/harness.hpp"
#include "pecon/schedulers.hpp"

namespace {

using namespace pecon;

constexpr int kConfigErrorExit = 2;

// Two decimals with trailing zeros stripped: 14.50 -> 14.5.
std::string trimmed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

// Output is assembled in memory and only written once the command succeeded.
void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + out_path + "'");
  f << text;
}

std::string run_bounds(int q, int b, double c, int precision) {
  std::ostringstream os;
  const auto bounds = analysis::delay_bounds(q, b, c);
  os << "lower=" << trimmed(bounds.lower, precision) << '\n';
  if (b == 1 && c == 1.0) os << "exact=" << trimmed(analysis::exact_expected_delay(q), precision) << '\n';
  os << "upper=" << trimmed(bounds.upper, precision) << '\n';
  if (bounds.heuristic) os << "heuristic=true\n";
  return os.str();
}

std::string run_schedule(const harness::ScheduleInstance& inst, const std::string& algo, harness::OutputFormat format) {
  const auto& jobs = inst.jobs;
  sched::Schedule s;
  if (algo == "greedy") {
    s = sched::mtw_greedy(jobs);
  } else if (algo == "opt") {
    s = sched::mtw_optimal(jobs);
  } else {
    std::vector<sched::Arrival> arrivals;
    for (std::size_t i = 0; i < jobs.size(); ++i) arrivals.push_back({inst.job_flow[i], jobs[i].release});
    const auto services =
        algo == "fifo" ? sched::fifo_schedule(arrivals) : sched::wf2q_schedule(inst.flow_weights, arrivals);
    s.completion.assign(jobs.size(), 0);
    for (const auto& sv : services) {
      s.order.push_back(sv.arrival);
      s.completion[sv.arrival] = sv.round + 1;
    }
  }
  const std::int64_t total = sched::total_wealth(jobs, s);

  std::ostringstream os;
  if (format == harness::OutputFormat::Json) {
    nlohmann::json out = {{"algorithm", algo}, {"total_wealth", total}, {"schedule", nlohmann::json::array()}};
    for (auto i : s.order)
      out["schedule"].push_back({{"id", jobs[i].id},
                                 {"flow", inst.job_flow[i]},
                                 {"release", jobs[i].release},
                                 {"deadline", jobs[i].deadline},
                                 {"weight", jobs[i].weight},
                                 {"completion", s.completion[i]}});
    os << out.dump(2) << '\n';
    return os.str();
  }
  os << "position,id,flow,release,deadline,weight,completion\n";
  std::size_t pos = 0;
  for (auto i : s.order)
    os << pos++ << ',' << jobs[i].id << ',' << inst.job_flow[i] << ',' << jobs[i].release << ',' << jobs[i].deadline
       << ',' << jobs[i].weight << ',' << s.completion[i] << '\n';
  os << "total_wealth,,,,,," << total << '\n';
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Router-queue packet economy simulator"};
  app.require_subcommand(1);

  std::string out_path;
  std::string format_name = "csv";
  std::optional<std::uint64_t> seed;

  auto* simulate = app.add_subcommand("simulate", "Run one economy from a JSON config");
  std::string config_path;
  simulate->add_option("config", config_path, "Economy config file")->required();

  auto* experiment = app.add_subcommand("experiment", "Run an experiment grid from a JSON spec");
  std::string spec_path;
  bool fast = false;
  bool serial = false;
  experiment->add_option("spec", spec_path, "Experiment spec file")->required();
  experiment->add_flag("--fast", fast, "20q instead of 100q deliveries per run");
  experiment->add_flag("--serial", serial, "Run cells on one thread");

  for (auto* sub : {simulate, experiment}) {
    sub->add_option("--seed", seed, "Override the master seed");
    sub->add_option("--out", out_path, "Write output to a file instead of stdout");
    sub->add_option("--format", format_name, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }

  auto* bounds = app.add_subcommand("bounds", "Closed-form delay of an always-buying packet");
  int q = 100;
  int b = 1;
  double c = 1.0;
  int precision = 2;
  bounds->add_option("--q", q, "Queue size")->required();
  bounds->add_option("--b", b, "Trading periods per round");
  bounds->add_option("--c", c, "One seller in every c packets");
  bounds->add_option("--precision", precision, "Decimals")->check(CLI::Range(0, 12));

  auto* schedule = app.add_subcommand("schedule", "Schedule a unit-job instance");
  std::string instance_path;
  std::string algo;
  schedule->add_option("instance", instance_path, "Instance file")->required();
  schedule->add_option("--algo", algo, "fifo, wf2q, greedy or opt")
      ->required()
      ->check(CLI::IsMember({"fifo", "wf2q", "greedy", "opt"}));
  schedule->add_option("--out", out_path, "Write output to a file instead of stdout");
  schedule->add_option("--format", format_name, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigErrorExit;
  }

  try {
    const auto format = harness::parse_format(format_name);
    std::ostringstream os;
    if (*simulate) {
      auto config = harness::parse_economy_config(harness::read_file(config_path));
      if (seed) config.seed = *seed;
      Economy economy(config);
      const auto report = economy.run();
      harness::write_rows(os, harness::report_rows(economy.config(), report), format);
    } else if (*experiment) {
      auto spec = harness::parse_experiment_spec(harness::read_file(spec_path));
      if (seed) spec.seed = *seed;
      if (fast) spec.fast = true;
      if (serial) spec.execution = Execution::Serial;
      harness::write_rows(os, harness::run_experiment(spec), format);
    } else if (*bounds) {
      os << run_bounds(q, b, c, precision);
    } else if (*schedule) {
      os << run_schedule(harness::parse_schedule_instance(harness::read_file(instance_path)), algo, format);
    }
    emit(os.str(), out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigErrorExit;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
