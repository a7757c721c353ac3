// Serial vs OpenMP execution of the same experiment cells.
#include <benchmark/benchmark.h>

#include "pecon/harness.hpp"

using namespace pecon;

namespace {

harness::ExperimentSpec delay_spec(Execution ex) {
  auto s = harness::ExperimentSpec::defaults(harness::ExperimentId::Delay);
  s.q = {20, 50};
  s.c_b = {2, 10};
  s.b = {1};
  s.algorithms = {"PE"};
  s.repetitions = 2;
  s.fast = true;
  s.execution = ex;
  return s;
}

harness::ExperimentSpec scheduling_spec(Execution ex) {
  auto s = harness::ExperimentSpec::defaults(harness::ExperimentId::Scheduling);
  s.max_packets = 6;
  s.repetitions = 50;
  s.execution = ex;
  return s;
}

void BM_DelaySweep(benchmark::State& state) {
  const auto spec = delay_spec(state.range(0) ? Execution::Parallel : Execution::Serial);
  for (auto _ : state) benchmark::DoNotOptimize(harness::run_experiment(spec));
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_SchedulingSweep(benchmark::State& state) {
  const auto spec = scheduling_spec(state.range(0) ? Execution::Parallel : Execution::Serial);
  for (auto _ : state) benchmark::DoNotOptimize(harness::run_experiment(spec));
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_DelaySweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SchedulingSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
