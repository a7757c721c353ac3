#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "pecon/core.hpp"

namespace pecon::sched {

/// Unit-time job: may start at `release`, earns weight * max(deadline - completion, 0).
struct Job {
  int id = 0;
  Rounds release = 0;
  Rounds deadline = 0;
  std::int64_t weight = 0;
};

void validate_jobs(const std::vector<Job>& jobs);

struct Schedule {
  std::vector<std::size_t> order;  // job indices in service order
  std::vector<Rounds> completion;  // per job index; slot t ends at time t
};

std::int64_t total_wealth(const std::vector<Job>& jobs, const Schedule& s);

/// Work-preserving list schedule that always picks the next job in `order`
/// among those released; idles only when nothing is released.
Schedule list_schedule(const std::vector<Job>& jobs, const std::vector<std::size_t>& priority);

/// Serves jobs strictly in the given order, waiting for releases.
Schedule fixed_order_schedule(const std::vector<Job>& jobs, const std::vector<std::size_t>& order);

/// Smith's rule for unit jobs: largest released weight first, ties by id.
Schedule mtw_greedy(const std::vector<Job>& jobs);

/// Exact optimum via a job x slot assignment problem.
Schedule mtw_optimal(const std::vector<Job>& jobs);

/// Maximum over all n! service orders; n <= 10.
std::int64_t mtw_brute_force(const std::vector<Job>& jobs);

/// Release order, ties by id.
Schedule fifo_jobs(const std::vector<Job>& jobs);

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
/// Returns the column of each row.
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<std::int64_t>>& cost);

// ---- Packet-level service disciplines ----

struct Arrival {
  std::size_t flow = 0;
  Rounds time = 0;  // round in which the packet becomes available
};

struct Service {
  std::size_t arrival = 0;  // index into the arrivals
  Rounds round = 0;
};

/// Worst-case fair weighted fair queueing (WF2Q+), unit packets, link rate 1.
class Wf2qScheduler {
 public:
  explicit Wf2qScheduler(std::vector<double> weights);

  void enqueue(std::size_t flow, std::uint64_t tag);
  bool empty() const { return backlog_ == 0; }
  /// Serves one packet, returning (flow, tag).
  std::optional<std::pair<std::size_t, std::uint64_t>> serve();
  double virtual_time() const { return vtime_; }

 private:
  struct FlowState {
    double weight = 0;
    double start = 0;
    double finish = 0;
    std::deque<std::uint64_t> queue;
    bool backlogged() const { return !queue.empty(); }
  };
  void stamp_head(FlowState& f);

  std::vector<FlowState> flows_;
  double weight_sum_ = 0;
  double vtime_ = 0;
  std::size_t backlog_ = 0;
};

std::vector<Service> fifo_schedule(const std::vector<Arrival>& arrivals);
std::vector<Service> wf2q_schedule(const std::vector<double>& weights, const std::vector<Arrival>& arrivals);

// ---- Closed-loop window flows ----

enum class Discipline { Fifo, Wf2q };

Discipline parse_discipline(const std::string& s);
std::string to_string(Discipline d);

struct WindowFlow {
  std::string name;
  int window = 1;
  double weight = 1;
};

struct WindowFlowStats {
  std::string name;
  std::int64_t delivered = 0;
  double delay_sum = 0;
  double delay_sq_sum = 0;
  double mean_delay() const;
  double stddev_delay() const;
};

/// Saturated queue of window flows: each delivered packet is replaced by its
/// flow in the next round. Packets delivered after `warmup` rounds are counted.
std::vector<WindowFlowStats> simulate_window_flows(const std::vector<WindowFlow>& flows, Discipline discipline,
                                                   std::int64_t rounds, std::int64_t warmup);

}  // namespace pecon::sched
