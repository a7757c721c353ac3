#pragma once

#include <optional>
#include <vector>

#include "pecon/core.hpp"

namespace pecon {

enum class Side { Buy, Sell };

/// A packet's position-trade quote. For a seller the compensatory price is the
/// minimum it accepts; for a buyer it is negative and its magnitude is the
/// maximum it pays.
struct Quote {
  ExactPrice compensatory_price;
  bool willing = false;
  Side side = Side::Sell;
  Rounds d_epsilon = 0;  // signed change of the packet's delay
};

/// Rate-based compensatory price: v(d1) - v(d1 + d_eps) = cost * d_eps in the linear region.
Money comp_price_rate_based(Money cost, Rounds d_eps);

/// Window-based compensatory price (V + a1) * d_eps / d1; keeps (v + a) / d unchanged.
ExactPrice comp_price_window_based(Money v_max, Money account, Rounds d1, Rounds d_eps);

/// How quotes are denominated.
struct PriceBasis {
  // Unset: money enters utility (Scenario 1). Set: fiat money outside utility,
  // converted at a fixed value per unit, traded in whole units.
  std::optional<Money> fiat_unit_value;
};

/// Quote of `p` for moving by `d_eps` rounds (positive: sell, negative: buy).
Quote make_quote(const Packet& p, const FlowSpec& flow, Rounds d_eps, const InventoryBounds& bounds,
                 const PriceBasis& basis = {});

struct NegotiationContext {
  const std::vector<FlowSpec>* flows = nullptr;
  InventoryBounds bounds;
  PriceBasis basis;
  Rounds round = 0;
  int period = 0;
};

/// Bilateral negotiation between two idle packets; the rear packet is the
/// buyer. Executes only on strict surplus (ask < bid) at the midpoint price.
/// Argument order does not matter.
std::optional<TradeRecord> negotiate(const Packet& a, const Packet& b, const NegotiationContext& ctx);

/// Swaps the two slots and settles the price. Throws std::logic_error if the
/// record does not match the state or an account bound would be violated.
void execute_trade(RouterQueueState& state, const TradeRecord& trade, const InventoryBounds& bounds = {});

}  // namespace pecon
