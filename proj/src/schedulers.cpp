#include "pecon/schedulers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pecon::sched {

void validate_jobs(const std::vector<Job>& jobs) {
  for (const auto& j : jobs) {
    if (j.release < 0) throw ConfigError("job " + std::to_string(j.id) + ": release must be non-negative");
    if (j.deadline <= j.release) throw ConfigError("job " + std::to_string(j.id) + ": deadline must exceed release");
    if (j.weight < 0) throw ConfigError("job " + std::to_string(j.id) + ": weight must be non-negative");
  }
}

std::int64_t total_wealth(const std::vector<Job>& jobs, const Schedule& s) {
  if (s.completion.size() != jobs.size()) throw std::invalid_argument("total_wealth: schedule does not match jobs");
  std::int64_t w = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) w += jobs[i].weight * std::max<Rounds>(jobs[i].deadline - s.completion[i], 0);
  return w;
}

Schedule list_schedule(const std::vector<Job>& jobs, const std::vector<std::size_t>& priority) {
  const std::size_t n = jobs.size();
  if (priority.size() != n) throw std::invalid_argument("list_schedule: priority must rank every job");
  std::vector<std::size_t> rank(n);
  for (std::size_t k = 0; k < n; ++k) rank.at(priority[k]) = k;

  Schedule s;
  s.completion.assign(n, 0);
  std::vector<bool> done(n, false);
  Rounds t = 0;
  while (s.order.size() < n) {
    std::optional<std::size_t> pick;
    Rounds next_release = std::numeric_limits<Rounds>::max();
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      if (jobs[i].release <= t) {
        if (!pick || rank[i] < rank[*pick]) pick = i;
      } else {
        next_release = std::min(next_release, jobs[i].release);
      }
    }
    if (!pick) {
      t = next_release;
      continue;
    }
    done[*pick] = true;
    s.order.push_back(*pick);
    s.completion[*pick] = ++t;
  }
  return s;
}

Schedule fixed_order_schedule(const std::vector<Job>& jobs, const std::vector<std::size_t>& order) {
  Schedule s;
  s.completion.assign(jobs.size(), 0);
  Rounds t = 0;
  for (auto i : order) {
    t = std::max(t, jobs.at(i).release) + 1;
    s.completion[i] = t;
    s.order.push_back(i);
  }
  return s;
}

Schedule mtw_greedy(const std::vector<Job>& jobs) {
  std::vector<std::size_t> priority(jobs.size());
  std::iota(priority.begin(), priority.end(), 0);
  std::stable_sort(priority.begin(), priority.end(), [&](std::size_t a, std::size_t b) {
    if (jobs[a].weight != jobs[b].weight) return jobs[a].weight > jobs[b].weight;
    return jobs[a].id < jobs[b].id;
  });
  return list_schedule(jobs, priority);
}

std::vector<std::size_t> solve_assignment(const std::vector<std::vector<std::int64_t>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost[0].size();
  if (m < n) throw std::invalid_argument("solve_assignment: more rows than columns");
  for (const auto& row : cost)
    if (row.size() != m) throw std::invalid_argument("solve_assignment: ragged cost matrix");

  // Shortest augmenting paths with potentials; 1-based with a virtual column 0.
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(m + 1, 0);
  std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<std::int64_t> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      std::int64_t delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col(n);
  for (std::size_t j = 1; j <= m; ++j)
    if (match[j] != 0) col[match[j] - 1] = j - 1;
  return col;
}

Schedule mtw_optimal(const std::vector<Job>& jobs) {
  validate_jobs(jobs);
  const std::size_t n = jobs.size();
  if (n == 0) return {};
  Rounds horizon = 0;
  for (const auto& j : jobs) horizon = std::max({horizon, j.deadline, j.release + static_cast<Rounds>(n)});

  // Slot t (1-based) ends at time t; it is open to jobs released by t - 1.
  std::int64_t forbidden = 1;
  for (const auto& j : jobs) forbidden += j.weight * j.deadline;
  std::vector<std::vector<std::int64_t>> cost(n, std::vector<std::int64_t>(static_cast<std::size_t>(horizon)));
  for (std::size_t i = 0; i < n; ++i) {
    for (Rounds t = 1; t <= horizon; ++t) {
      const auto& j = jobs[i];
      cost[i][t - 1] = t >= j.release + 1 ? -j.weight * std::max<Rounds>(j.deadline - t, 0) : forbidden;
    }
  }
  const auto slot = solve_assignment(cost);

  // Earliest-slot-first list scheduling finishes every job no later than its
  // assigned slot and never idles while a job is released.
  std::vector<std::size_t> priority(n);
  std::iota(priority.begin(), priority.end(), 0);
  std::sort(priority.begin(), priority.end(), [&](std::size_t a, std::size_t b) { return slot[a] < slot[b]; });
  return list_schedule(jobs, priority);
}

std::int64_t mtw_brute_force(const std::vector<Job>& jobs) {
  if (jobs.size() > 10) throw std::invalid_argument("mtw_brute_force: at most 10 jobs");
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t best = 0;
  do {
    best = std::max(best, total_wealth(jobs, fixed_order_schedule(jobs, order)));
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

Schedule fifo_jobs(const std::vector<Job>& jobs) {
  std::vector<std::size_t> priority(jobs.size());
  std::iota(priority.begin(), priority.end(), 0);
  std::stable_sort(priority.begin(), priority.end(), [&](std::size_t a, std::size_t b) {
    if (jobs[a].release != jobs[b].release) return jobs[a].release < jobs[b].release;
    return jobs[a].id < jobs[b].id;
  });
  return list_schedule(jobs, priority);
}

Wf2qScheduler::Wf2qScheduler(std::vector<double> weights) {
  if (weights.empty()) throw ConfigError("WF2Q needs at least one flow");
  for (double w : weights) {
    if (!(w > 0) || !std::isfinite(w)) throw ConfigError("WF2Q weights must be positive");
    FlowState f;
    f.weight = w;
    flows_.push_back(f);
    weight_sum_ += w;
  }
}

void Wf2qScheduler::stamp_head(FlowState& f) {
  f.start = std::max(f.finish, vtime_);
  f.finish = f.start + weight_sum_ / f.weight;
}

void Wf2qScheduler::enqueue(std::size_t flow, std::uint64_t tag) {
  FlowState& f = flows_.at(flow);
  const bool was_idle = !f.backlogged();
  f.queue.push_back(tag);
  ++backlog_;
  if (was_idle) stamp_head(f);
}

std::optional<std::pair<std::size_t, std::uint64_t>> Wf2qScheduler::serve() {
  if (backlog_ == 0) return std::nullopt;
  double min_start = std::numeric_limits<double>::infinity();
  for (const auto& f : flows_)
    if (f.backlogged()) min_start = std::min(min_start, f.start);
  vtime_ = std::max(vtime_, min_start);

  constexpr double kEps = 1e-9;
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    const auto& f = flows_[i];
    if (!f.backlogged() || f.start > vtime_ + kEps) continue;
    if (!pick || f.finish < flows_[*pick].finish - kEps) pick = i;
  }
  FlowState& f = flows_[*pick];
  const std::uint64_t tag = f.queue.front();
  f.queue.pop_front();
  --backlog_;
  if (f.backlogged()) {
    f.start = f.finish;
    f.finish = f.start + weight_sum_ / f.weight;
  }
  vtime_ += 1.0;
  return std::make_pair(*pick, tag);
}

std::vector<Service> fifo_schedule(const std::vector<Arrival>& arrivals) {
  std::vector<std::size_t> idx(arrivals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return arrivals[a].time < arrivals[b].time; });
  std::vector<Service> out;
  Rounds t = std::numeric_limits<Rounds>::min();
  for (auto i : idx) {
    t = std::max(t + 1, arrivals[i].time);
    out.push_back({i, t});
  }
  return out;
}

std::vector<Service> wf2q_schedule(const std::vector<double>& weights, const std::vector<Arrival>& arrivals) {
  Wf2qScheduler s(weights);
  for (const auto& a : arrivals)
    if (a.flow >= weights.size()) throw ConfigError("arrival references an unknown flow");
  std::vector<std::size_t> idx(arrivals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return arrivals[a].time < arrivals[b].time; });
  std::vector<Service> out;
  std::size_t next = 0;
  Rounds t = idx.empty() ? 0 : arrivals[idx.front()].time;
  while (out.size() < arrivals.size()) {
    if (s.empty() && arrivals[idx[next]].time > t) t = arrivals[idx[next]].time;
    while (next < idx.size() && arrivals[idx[next]].time <= t) {
      s.enqueue(arrivals[idx[next]].flow, idx[next]);
      ++next;
    }
    const auto served = s.serve();
    out.push_back({static_cast<std::size_t>(served->second), t});
    ++t;
  }
  return out;
}

Discipline parse_discipline(const std::string& s) {
  if (s == "fifo") return Discipline::Fifo;
  if (s == "wf2q") return Discipline::Wf2q;
  throw ConfigError("unknown discipline '" + s + "'");
}

std::string to_string(Discipline d) { return d == Discipline::Fifo ? "fifo" : "wf2q"; }

double WindowFlowStats::mean_delay() const { return delivered > 0 ? delay_sum / static_cast<double>(delivered) : 0.0; }

double WindowFlowStats::stddev_delay() const {
  if (delivered < 2) return 0.0;
  const double n = static_cast<double>(delivered);
  const double var = (delay_sq_sum - delay_sum * delay_sum / n) / (n - 1);
  return var > 0 ? std::sqrt(var) : 0.0;
}

std::vector<WindowFlowStats> simulate_window_flows(const std::vector<WindowFlow>& flows, Discipline discipline,
                                                   std::int64_t rounds, std::int64_t warmup) {
  if (flows.empty()) throw ConfigError("simulate_window_flows: no flows");
  std::vector<WindowFlowStats> stats;
  std::vector<double> weights;
  for (const auto& f : flows) {
    if (f.window < 1) throw ConfigError("flow '" + f.name + "': window must be at least 1");
    stats.push_back({f.name, 0, 0, 0});
    weights.push_back(f.weight);
  }

  // Packets are tagged with their arrival round.
  std::deque<std::pair<std::size_t, Rounds>> fifo;
  std::optional<Wf2qScheduler> wf2q;
  if (discipline == Discipline::Wf2q) wf2q.emplace(weights);
  auto arrive = [&](std::size_t flow, Rounds t) {
    if (wf2q) {
      wf2q->enqueue(flow, static_cast<std::uint64_t>(t));
    } else {
      fifo.emplace_back(flow, t);
    }
  };
  for (std::size_t i = 0; i < flows.size(); ++i)
    for (int w = 0; w < flows[i].window; ++w) arrive(i, 1);

  std::optional<std::size_t> returning;
  for (Rounds t = 1; t <= rounds; ++t) {
    if (returning) arrive(*returning, t);
    std::size_t flow = 0;
    Rounds arrived = 0;
    if (wf2q) {
      const auto s = wf2q->serve();
      flow = s->first;
      arrived = static_cast<Rounds>(s->second);
    } else {
      std::tie(flow, arrived) = fifo.front();
      fifo.pop_front();
    }
    if (t > warmup) {
      const double d = static_cast<double>(t - arrived + 1);
      auto& s = stats[flow];
      ++s.delivered;
      s.delay_sum += d;
      s.delay_sq_sum += d * d;
    }
    returning = flow;
  }
  return stats;
}

}  // namespace pecon::sched
