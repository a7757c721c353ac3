#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecon/money.hpp"

namespace pecon {

using Rounds = std::int64_t;
using FlowId = std::uint32_t;
using PacketId = std::uint64_t;

inline constexpr Rounds kUnboundedDelay = std::int64_t{1} << 40;

/// Raised for invalid user-supplied configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// v(d) = max(v_max - cost * d, 0), with a voluntary deadline d_max.
struct ValueFunction {
  Money v_max;
  Money cost;     // per round of delay
  Rounds d_max;   // the packet refuses delays beyond this

  /// d_max defaults to the zero-value point floor(v_max / cost).
  static ValueFunction make(Money v_max, Money cost, std::optional<Rounds> d_max = std::nullopt);
  Rounds zero_value_delay() const;
  void validate() const;
};

Money packet_value(const ValueFunction& vf, Rounds delay);

/// Delay of a packet entering at zero-based position k that sold r_s and
/// bought r_b rounds: k + 1 + r_s - r_b.
Rounds packet_delay(Rounds start_pos, Rounds rounds_sold, Rounds rounds_bought);

enum class FlowKind { WindowBased, RateBased };

enum class TradeMode { AlwaysTrade, NeverTrade, SellOnly, BuyOnly };

struct TradingPolicy {
  TradeMode mode = TradeMode::AlwaysTrade;
  // Only one packet in every `sell_one_in` of the flow is willing to sell.
  std::optional<int> sell_one_in;

  bool may_buy() const { return mode == TradeMode::AlwaysTrade || mode == TradeMode::BuyOnly; }
  bool may_sell() const { return mode == TradeMode::AlwaysTrade || mode == TradeMode::SellOnly; }
  bool seller_by_sequence(std::uint64_t seq) const {
    return !sell_one_in || seq % static_cast<std::uint64_t>(*sell_one_in) == 0;
  }
};

struct FlowSpec {
  FlowId id = 0;
  std::string name;
  FlowKind kind = FlowKind::WindowBased;
  int window = 1;     // packets in flight, window-based flows
  double rate = 0.0;  // packets per round, rate-based flows
  ValueFunction value;
  TradingPolicy policy;
};

/// Finite-state bounds on inventories; unbounded unless configured.
struct InventoryBounds {
  Money account_min = Money::lowest();  // -s_a
  Money account_max = Money::max();     // s_b
  Rounds delay_max = kUnboundedDelay;   // s_d
};

struct Inventory {
  Money account;
  Rounds delay = 0;     // rounds spent so far, counting the current one
  Rounds position = 0;  // zero-based queue index
  Rounds rounds_sold = 0;
  Rounds rounds_bought = 0;

  /// Total delay if no further trades happen.
  Rounds projected_delay() const { return delay + position; }
};

/// Rate-based: v(d) + account. Window-based: (v(d) + account) / d.
double utility(const Inventory& inv, const ValueFunction& vf, FlowKind kind);

bool is_admissible(const Inventory& inv, const ValueFunction& vf, const InventoryBounds& bounds = {});

struct Packet {
  PacketId id = 0;
  FlowId flow = 0;
  std::uint64_t seq = 0;  // per-flow sequence number
  Inventory inv;
  Rounds entered = 0;
  Rounds entry_position = 0;
  Rounds failure_delay = 0;
  bool seller = true;  // one-in-c participation draw
};

struct RouterQueueState {
  std::size_t capacity = 0;
  std::vector<Packet> slots;  // index 0 is being served
  Rounds round = 0;
  std::uint64_t seed = 0;

  bool positions_consistent() const;
};

struct TradeRecord {
  Rounds round = 0;
  int period = 0;
  PacketId buyer = 0;
  PacketId seller = 0;
  Rounds buyer_pos_before = 0;
  Rounds seller_pos_before = 0;
  Money price;

  Rounds distance() const { return buyer_pos_before - seller_pos_before; }
};

std::string to_string(FlowKind kind);
std::string to_string(TradeMode mode);
FlowKind parse_flow_kind(const std::string& s);
TradeMode parse_trade_mode(const std::string& s);

}  // namespace pecon
