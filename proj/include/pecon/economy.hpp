#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pecon/core.hpp"
#include "pecon/pairing.hpp"
#include "pecon/pricing.hpp"
#include "pecon/rng.hpp"

namespace pecon {

enum class PairingMode {
  Pipelined,  // permutations over all idle queue positions from a ShufflePipeline
  Direct,     // a fresh Fisher-Yates permutation over the occupied idle positions
};

enum class Replacement {
  Immediate,  // closed loop: every delivered packet is replaced by its flow
  Drain,      // batch: delivered packets are not replaced, run until empty
};

/// Fiat money layer of the two-flow team economy.
struct FiatConfig {
  std::int64_t total_units = 0;                // m
  std::int64_t deposit_cap = std::int64_t{1} << 40;  // s_d
  std::int64_t packet_cap = std::int64_t{1} << 40;   // s_b for fiat accounts
};

struct TeamSpec {
  FlowId business = 0;
  FlowId economy = 0;
};

struct EconomyConfig {
  std::size_t queue_size = 0;  // Q
  std::vector<FlowSpec> flows;
  int trading_periods = 1;  // b
  double failure_probability = 0.0;
  std::int64_t rounds = 0;      // total rounds, including warm-up
  std::int64_t deliveries = 0;  // alternative stop: measured deliveries
  std::int64_t warmup_rounds = 0;
  std::uint64_t seed = 1;
  PairingMode pairing = PairingMode::Pipelined;
  Replacement replacement = Replacement::Immediate;
  bool shuffle_initial = true;  // otherwise flows enter in listed order
  InventoryBounds bounds;
  bool record_series = false;

  std::optional<FiatConfig> fiat;
  std::vector<TeamSpec> teams;

  void validate() const;
};

struct Delivery {
  PacketId packet = 0;
  FlowId flow = 0;
  Rounds delay = 0;  // includes failure delay
  Money value;
  Money account;
  Rounds entry_position = 0;
  Rounds rounds_sold = 0;
  Rounds rounds_bought = 0;
  Rounds failure_delay = 0;
};

struct RoundEvents {
  Rounds round = 0;
  std::optional<Delivery> delivered;
  std::vector<TradeRecord> trades;
  int entrants = 0;
  bool served = false;
  bool zero_state = false;
  int team_failures = 0;
  std::int64_t redistributed_units = 0;
};

struct FlowStats {
  FlowId flow = 0;
  std::string name;
  std::int64_t delivered = 0;
  double delay_sum = 0;
  double delay_sq_sum = 0;
  double value_sum = 0;

  double mean_delay() const;
  double stddev_delay() const;
};

struct GroupStats {
  std::string name;
  std::int64_t delivered = 0;
  double mean_delay = 0;
  double stddev_delay = 0;
  double value_sum = 0;
};

struct SimulationReport {
  std::int64_t rounds = 0;
  std::int64_t measured_rounds = 0;
  std::int64_t idle_rounds = 0;
  std::vector<FlowStats> flows;
  double wealth_rate = 0;  // realized packet value per measured round
  double total_value = 0;
  std::int64_t trades = 0;
  std::vector<double> wealth_series;
  std::int64_t failures = 0;
  std::int64_t zero_state_events = 0;
  std::int64_t team_failures = 0;
  std::int64_t redistributions = 0;
  Money money_total;            // Scenario 1: queue + pending + settled balances
  std::int64_t fiat_total = 0;  // Scenario 2: packets + deposits + escrow

  std::int64_t delivered() const;
  /// Flows aggregated by name, in first-appearance order.
  std::vector<GroupStats> groups() const;
  std::optional<GroupStats> group(const std::string& name) const;
};

/// With probability p_f an extra delay uniform on {1..q-1}.
std::optional<Rounds> inject_failure(CounterRng& rng, double p_f, std::size_t q);

/// The round engine. Each round: deliver the packet served last round and
/// shift the queue, admit entrants (replacements, failed packets whose delay
/// expired, in random order), settle team money, run the trading periods,
/// then start serving the head packet.
class Economy {
 public:
  explicit Economy(EconomyConfig config);

  RoundEvents run_round();
  /// Runs until the configured length and returns the report.
  SimulationReport run();
  bool finished() const;

  const RouterQueueState& state() const { return state_; }
  const EconomyConfig& config() const { return config_; }
  SimulationReport report() const;

  /// Sum of all money: queue and pending accounts plus settled flow balances.
  Money total_money() const;
  /// Sum of fiat units: packet accounts, deposits and escrow.
  std::int64_t total_fiat() const;
  const std::vector<std::int64_t>& deposits() const { return deposits_; }
  std::int64_t escrow() const { return escrow_; }

 private:
  struct Pending {
    Packet packet;
    Rounds release = 0;
  };

  Packet new_packet(FlowId flow, Money account);
  void deliver(Packet served, RoundEvents& ev);
  void settle_fiat_on_delivery(const Packet& served, Packet& successor);
  void redistribute_escrow(RoundEvents& ev);
  void detect_team_failures(RoundEvents& ev);
  void trading_period(int period, RoundEvents& ev);
  bool is_zero_state() const;
  bool measuring() const { return state_.round > config_.warmup_rounds; }

  EconomyConfig config_;
  RouterQueueState state_;
  NegotiationContext ctx_;
  CounterRng pair_rng_, fail_rng_, order_rng_, fiat_rng_;
  std::optional<ShufflePipeline> pipeline_;
  std::vector<Pending> pending_;
  std::vector<std::uint64_t> next_seq_;
  std::vector<Money> settled_;  // per-flow money of delivered packets
  PacketId next_id_ = 0;
  bool serving_ = false;

  std::vector<std::int64_t> deposits_;
  std::vector<bool> team_reset_;
  std::vector<std::optional<std::size_t>> team_of_;
  std::int64_t escrow_ = 0;

  SimulationReport report_;
};

/// Scenario 1: window-based flows whose windows fill the queue, money enters utility.
SimulationReport run_scenario1(const EconomyConfig& config);
/// Scenario 2: business/economy teams trading fiat money through team deposits.
SimulationReport run_scenario2(const EconomyConfig& config);

/// Team economy with `teams` business/economy pairs, each window 1.
EconomyConfig make_team_economy(std::size_t teams, const ValueFunction& business, const ValueFunction& economy,
                                std::int64_t fiat_total);

}  // namespace pecon
