#include <doctest.h>

#include <stdexcept>

#include "pecon/harness.hpp"
#include "pecon/parallel.hpp"

using namespace pecon;

TEST_CASE("map_cells gives the same results on both paths") {
  auto f = [](std::size_t i) {
    CounterRng r(i);
    std::uint64_t acc = 0;
    for (int k = 0; k < 1000; ++k) acc ^= r();
    return acc;
  };
  CHECK(map_cells(64, f, Execution::Serial) == map_cells(64, f, Execution::Parallel));
  CHECK(map_cells(0, f).empty());
  CHECK(worker_threads() >= 1);
}

TEST_CASE("map_cells rethrows a failing cell") {
  auto f = [](std::size_t i) -> int {
    if (i == 5) throw std::runtime_error("cell 5");
    return static_cast<int>(i);
  };
  CHECK_THROWS_WITH_AS(map_cells(10, f, Execution::Parallel), "cell 5", std::runtime_error);
  CHECK_THROWS_AS(map_cells(10, f, Execution::Serial), std::runtime_error);
}

TEST_CASE("experiments do not depend on the execution mode") {
  auto spec = harness::ExperimentSpec::defaults(harness::ExperimentId::Delay);
  spec.q = {10, 20};
  spec.c_b = {2};
  spec.b = {1, 2};
  spec.repetitions = 2;
  spec.fast = true;
  spec.execution = Execution::Serial;
  const auto serial = harness::run_experiment(spec);
  spec.execution = Execution::Parallel;
  const auto parallel = harness::run_experiment(spec);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].metric == parallel[i].metric);
    CHECK(serial[i].value == parallel[i].value);
    CHECK(serial[i].stddev == parallel[i].stddev);
  }
}
