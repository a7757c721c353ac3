#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace pecon::analysis {

// Delay of a packet that buys every position improvement offered to it, with
// every other idle packet willing to sell.

/// Exact mean delay, sum over s = 1..q-1 of
/// s * (1/(q-2))^s * (s-1) * (q-2)! / (q-s-1)!. Requires q >= 3.
double exact_expected_delay(int q);

/// Upper bound (-1 + 2b + 2 sqrt(2b(q-2))) / (2b).
double delay_upper_bound(int q, int b);
/// Upper bound when one packet in every c sells: 1 - c/2 + sqrt(2c(q-2)).
double delay_upper_bound_c(int q, double c);

/// Lower bound (-1 + 2b + sqrt(1 - 8b + 4bq)) / (2b).
double delay_lower_bound(int q, int b);
/// Lower bound when one packet in every c sells: (2-c)/2 + sqrt(c^2 - 8c + 4qc)/2.
double delay_lower_bound_c(int q, double c);

/// Both bounds with b trading periods and one-in-c sellers, treating the pair as
/// b/c effective trading periods. Heuristic when b != 1 and c != 1 together.
struct DelayBounds {
  double lower = 0;
  double upper = 0;
  bool heuristic = false;
};
DelayBounds delay_bounds(int q, int b, double c = 1.0);

/// E[min of k iid uniforms on [0, U]] = U / (k + 1).
double expected_min_uniform(int k, double U);

struct WealthScenarioParams {
  int n_e = 0;
  int n_b = 0;
  double v_e = 0;
  double v_b = 0;
  double c_e = 0;
  double c_b = 0;
  int q = 0;          // n_e + n_b
  double d_cap = 0;   // maximum delay of any packet

  static WealthScenarioParams make(int n_e, int n_b, double v_e, double v_b, double c_e, double c_b,
                                   std::optional<double> d_cap = std::nullopt);
  void validate() const;
};

/// FIFO: every packet waits q rounds.
double wealth_no_trades(const WealthScenarioParams& p);
/// Economy packets stretched to d_cap, business packets share the freed bandwidth.
double wealth_ideal(const WealthScenarioParams& p);
/// Business delay pinned at d_b_min; throws std::domain_error when the
/// economy packets would need more than d_cap or the business rate exceeds 1.
double wealth_ideal_feasible(const WealthScenarioParams& p, double d_b_min = 2.0);

/// A closed-loop window-1 flow for the equal-value schedule check.
struct CyclicFlow {
  std::int64_t v_max = 0;
  std::int64_t cost = 0;
  std::int64_t d_max = 0;
};

using Rational = boost::rational<std::int64_t>;

/// Distinct wealth rates over all feasible cyclic service sequences of period
/// <= max_period. Every flow is served at least once per period; a packet's
/// delay is the gap since its flow's previous service. Rotations are skipped.
std::vector<Rational> cyclic_schedule_wealths(const std::vector<CyclicFlow>& flows, int max_period);

/// True iff every feasible schedule yields the same wealth rate.
bool equal_vmax_schedule_invariance(const std::vector<CyclicFlow>& flows, int max_period);

struct ClassRate {
  std::string name;
  int count = 0;
  double rate = 0;   // packets per round, per packet
  double delay = 0;  // 1 / rate
};

/// Economy packets pinned at their deadline rate, business packets split the
/// residual bandwidth equally. Throws std::domain_error if nothing is left.
std::vector<ClassRate> bandwidth_share_rates(int n_economy, double economy_deadline, int n_business);

}  // namespace pecon::analysis
