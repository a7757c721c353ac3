#include "pecon/core.hpp"

#include <algorithm>

namespace pecon {

ValueFunction ValueFunction::make(Money v_max, Money cost, std::optional<Rounds> d_max) {
  ValueFunction vf{v_max, cost, 0};
  vf.d_max = d_max ? *d_max : vf.zero_value_delay();
  return vf;
}

Rounds ValueFunction::zero_value_delay() const {
  if (cost.micros() <= 0) return kUnboundedDelay;
  return v_max.micros() / cost.micros();
}

void ValueFunction::validate() const {
  if (v_max.micros() <= 0) throw ConfigError("value function: v_max must be positive");
  if (cost.micros() < 0) throw ConfigError("value function: cost must be non-negative");
  if (d_max < 1) throw ConfigError("value function: d_max must be at least 1");
  if (cost.micros() > 0 && d_max > zero_value_delay())
    throw ConfigError("value function: d_max " + std::to_string(d_max) + " exceeds the zero-value delay " +
                      std::to_string(zero_value_delay()));
}

Money packet_value(const ValueFunction& vf, Rounds delay) {
  if (delay < 0) throw std::invalid_argument("packet_value: negative delay");
  const Money v = vf.v_max - vf.cost * delay;
  return std::max(v, Money{});
}

Rounds packet_delay(Rounds start_pos, Rounds rounds_sold, Rounds rounds_bought) {
  if (start_pos < 0) throw std::invalid_argument("packet_delay: negative start position");
  const Rounds d = start_pos + 1 + rounds_sold - rounds_bought;
  if (d < 1) throw std::logic_error("packet_delay: delay below one round, trade bookkeeping is inconsistent");
  return d;
}

double utility(const Inventory& inv, const ValueFunction& vf, FlowKind kind) {
  const double benefit = (packet_value(vf, inv.delay) + inv.account).to_double();
  if (kind == FlowKind::RateBased) return benefit;
  if (inv.delay < 1) throw std::invalid_argument("utility: window-based utility needs delay >= 1");
  return benefit / static_cast<double>(inv.delay);
}

bool is_admissible(const Inventory& inv, const ValueFunction& vf, const InventoryBounds& bounds) {
  return inv.projected_delay() <= vf.d_max && inv.delay <= bounds.delay_max && inv.account >= bounds.account_min &&
         inv.account <= bounds.account_max;
}

bool RouterQueueState::positions_consistent() const {
  if (slots.size() > capacity) return false;
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].inv.position != static_cast<Rounds>(i)) return false;
  return true;
}

std::string to_string(FlowKind kind) { return kind == FlowKind::WindowBased ? "window" : "rate"; }

std::string to_string(TradeMode mode) {
  switch (mode) {
    case TradeMode::AlwaysTrade: return "always";
    case TradeMode::NeverTrade: return "never";
    case TradeMode::SellOnly: return "sell_only";
    case TradeMode::BuyOnly: return "buy_only";
  }
  return "?";
}

FlowKind parse_flow_kind(const std::string& s) {
  if (s == "window") return FlowKind::WindowBased;
  if (s == "rate") return FlowKind::RateBased;
  throw ConfigError("unknown flow kind '" + s + "' (expected window|rate)");
}

TradeMode parse_trade_mode(const std::string& s) {
  if (s == "always") return TradeMode::AlwaysTrade;
  if (s == "never") return TradeMode::NeverTrade;
  if (s == "sell_only") return TradeMode::SellOnly;
  if (s == "buy_only") return TradeMode::BuyOnly;
  throw ConfigError("unknown trading policy '" + s + "' (expected always|never|sell_only|buy_only)");
}

}  // namespace pecon
