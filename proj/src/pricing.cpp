#include "pecon/pricing.hpp"

#include <stdexcept>
#include <utility>

namespace pecon {

Money comp_price_rate_based(Money cost, Rounds d_eps) { return cost * d_eps; }

ExactPrice comp_price_window_based(Money v_max, Money account, Rounds d1, Rounds d_eps) {
  if (d1 < 1) throw std::invalid_argument("comp_price_window_based: d1 must be >= 1");
  if (d1 + d_eps < 1) throw std::invalid_argument("comp_price_window_based: delay after the trade below one round");
  return {static_cast<Int128>((v_max + account).micros()) * d_eps, d1};
}

namespace {

// Value-denominated compensatory price, ignoring willingness.
ExactPrice value_price(const Packet& p, const FlowSpec& flow, Rounds d_eps, bool include_account) {
  const Rounds d1 = p.inv.projected_delay();
  if (flow.kind == FlowKind::WindowBased) {
    return comp_price_window_based(flow.value.v_max, include_account ? p.inv.account : Money{}, d1, d_eps);
  }
  // Rate-based: the value difference, clipped at zero value.
  return ExactPrice::of(packet_value(flow.value, d1) - packet_value(flow.value, d1 + d_eps));
}

ExactPrice to_fiat(const ExactPrice& value, Money unit_value) {
  return {value.num * Money::kScale, value.den * unit_value.micros()};
}

}  // namespace

Quote make_quote(const Packet& p, const FlowSpec& flow, Rounds d_eps, const InventoryBounds& bounds,
                 const PriceBasis& basis) {
  Quote q;
  q.d_epsilon = d_eps;
  q.side = d_eps > 0 ? Side::Sell : Side::Buy;
  const Rounds d1 = p.inv.projected_delay();
  if (d_eps > 0) {
    const Rounds d2 = d1 + d_eps;
    q.willing = flow.policy.may_sell() && p.seller && d2 <= flow.value.d_max && d2 <= bounds.delay_max;
  } else {
    q.willing = flow.policy.may_buy() && d_eps < 0;
  }
  if (d1 < 1 || d1 + d_eps < 1) {
    q.willing = false;
    return q;
  }
  q.compensatory_price = value_price(p, flow, d_eps, !basis.fiat_unit_value.has_value());
  if (basis.fiat_unit_value) q.compensatory_price = to_fiat(q.compensatory_price, *basis.fiat_unit_value);
  return q;
}

namespace {

std::optional<Money> settle_value_price(const ExactPrice& ask, const ExactPrice& bid) {
  const ExactPrice mid = midpoint(ask, bid);
  for (Money candidate : {mid.floor(), mid.ceil()}) {
    const ExactPrice c = ExactPrice::of(candidate);
    if (ask <= c && c < bid) return candidate;
  }
  return std::nullopt;
}

std::optional<Money> settle_fiat_price(const ExactPrice& ask, const ExactPrice& bid) {
  // Whole fiat units: nearest unit to the midpoint, kept inside [ask, bid).
  const ExactPrice mid = midpoint(ask, bid);
  const Int128 denom = static_cast<Int128>(mid.den) * Money::kScale;
  Int128 lo = mid.num / denom;
  if (mid.num % denom != 0 && mid.num < 0) --lo;
  const bool upper_closer = (mid.num - lo * denom) * 2 >= denom;
  const Int128 first = upper_closer ? lo + 1 : lo;
  const Int128 second = upper_closer ? lo : lo + 1;
  for (Int128 u : {first, second}) {
    const Money m = Money::units(static_cast<std::int64_t>(u));
    const ExactPrice c = ExactPrice::of(m);
    if (ask <= c && c < bid) return m;
  }
  return std::nullopt;
}

}  // namespace

std::optional<TradeRecord> negotiate(const Packet& a, const Packet& b, const NegotiationContext& ctx) {
  if (a.inv.position == b.inv.position) return std::nullopt;
  const Packet& front = a.inv.position < b.inv.position ? a : b;
  const Packet& rear = a.inv.position < b.inv.position ? b : a;
  if (front.inv.position < 1) return std::nullopt;  // the served packet does not trade

  const auto& flows = *ctx.flows;
  const Rounds delta = rear.inv.position - front.inv.position;
  const Quote ask = make_quote(front, flows.at(front.flow), delta, ctx.bounds, ctx.basis);
  if (!ask.willing) return std::nullopt;
  const Quote bid = make_quote(rear, flows.at(rear.flow), -delta, ctx.bounds, ctx.basis);
  if (!bid.willing) return std::nullopt;

  const ExactPrice bid_max = bid.compensatory_price.abs();
  if (!(ask.compensatory_price < bid_max)) return std::nullopt;

  const std::optional<Money> price = ctx.basis.fiat_unit_value ? settle_fiat_price(ask.compensatory_price, bid_max)
                                                               : settle_value_price(ask.compensatory_price, bid_max);
  if (!price) return std::nullopt;
  if (front.inv.account + *price > ctx.bounds.account_max) return std::nullopt;
  if (rear.inv.account - *price < ctx.bounds.account_min) return std::nullopt;

  TradeRecord t;
  t.round = ctx.round;
  t.period = ctx.period;
  t.buyer = rear.id;
  t.seller = front.id;
  t.buyer_pos_before = rear.inv.position;
  t.seller_pos_before = front.inv.position;
  t.price = *price;
  return t;
}

void execute_trade(RouterQueueState& state, const TradeRecord& trade, const InventoryBounds& bounds) {
  const auto bp = static_cast<std::size_t>(trade.buyer_pos_before);
  const auto sp = static_cast<std::size_t>(trade.seller_pos_before);
  if (bp >= state.slots.size() || sp >= state.slots.size() || bp <= sp)
    throw std::logic_error("execute_trade: positions out of range");
  Packet& buyer = state.slots[bp];
  Packet& seller = state.slots[sp];
  if (buyer.id != trade.buyer || seller.id != trade.seller)
    throw std::logic_error("execute_trade: record does not match the queue");
  const Money seller_after = seller.inv.account + trade.price;
  const Money buyer_after = buyer.inv.account - trade.price;
  if (seller_after > bounds.account_max || buyer_after < bounds.account_min)
    throw std::logic_error("execute_trade: account bound violated");

  const Rounds delta = trade.distance();
  seller.inv.account = seller_after;
  buyer.inv.account = buyer_after;
  seller.inv.rounds_sold += delta;
  buyer.inv.rounds_bought += delta;
  std::swap(state.slots[bp], state.slots[sp]);
  state.slots[bp].inv.position = static_cast<Rounds>(bp);
  state.slots[sp].inv.position = static_cast<Rounds>(sp);
}

}  // namespace pecon
