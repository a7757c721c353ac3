#include "pecon/economy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pecon {

double FlowStats::mean_delay() const { return delivered > 0 ? delay_sum / static_cast<double>(delivered) : 0.0; }

double FlowStats::stddev_delay() const {
  if (delivered < 2) return 0.0;
  const double n = static_cast<double>(delivered);
  const double var = (delay_sq_sum - delay_sum * delay_sum / n) / (n - 1);
  return var > 0 ? std::sqrt(var) : 0.0;
}

std::int64_t SimulationReport::delivered() const {
  std::int64_t n = 0;
  for (const auto& f : flows) n += f.delivered;
  return n;
}

std::vector<GroupStats> SimulationReport::groups() const {
  std::vector<GroupStats> out;
  std::vector<FlowStats> acc;
  for (const auto& f : flows) {
    auto it = std::find_if(acc.begin(), acc.end(), [&](const FlowStats& a) { return a.name == f.name; });
    if (it == acc.end()) {
      acc.push_back(f);
      continue;
    }
    it->delivered += f.delivered;
    it->delay_sum += f.delay_sum;
    it->delay_sq_sum += f.delay_sq_sum;
    it->value_sum += f.value_sum;
  }
  for (const auto& a : acc) out.push_back({a.name, a.delivered, a.mean_delay(), a.stddev_delay(), a.value_sum});
  return out;
}

std::optional<GroupStats> SimulationReport::group(const std::string& name) const {
  for (auto& g : groups())
    if (g.name == name) return g;
  return std::nullopt;
}

std::optional<Rounds> inject_failure(CounterRng& rng, double p_f, std::size_t q) {
  if (q < 2) throw std::invalid_argument("inject_failure: queue size must be at least 2");
  if (!rng.bernoulli(p_f)) return std::nullopt;
  return static_cast<Rounds>(rng.uniform(1, q - 1));
}

void EconomyConfig::validate() const {
  if (queue_size < 1) throw ConfigError("queue_size must be at least 1");
  if (flows.empty()) throw ConfigError("at least one flow is required");
  if (trading_periods < 1) throw ConfigError("trading_periods must be at least 1");
  if (!(failure_probability >= 0.0 && failure_probability <= 1.0))
    throw ConfigError("failure_probability must lie in [0, 1]");
  if (warmup_rounds < 0) throw ConfigError("warmup_rounds must be non-negative");
  if (rounds < 0 || deliveries < 0) throw ConfigError("run length must be non-negative");
  if (replacement == Replacement::Immediate && rounds == 0 && deliveries == 0)
    throw ConfigError("closed-loop runs need `rounds` or `deliveries`");

  std::size_t in_flight = 0;
  for (const auto& f : flows) {
    f.value.validate();
    if (f.window < 1) throw ConfigError("flow '" + f.name + "': window must be at least 1");
    if (f.policy.sell_one_in && *f.policy.sell_one_in < 1)
      throw ConfigError("flow '" + f.name + "': sell_one_in must be at least 1");
    in_flight += static_cast<std::size_t>(f.window);
  }
  if (in_flight != queue_size)
    throw ConfigError("window sizes sum to " + std::to_string(in_flight) + " but the queue holds " +
                      std::to_string(queue_size));
  if (bounds.account_min > bounds.account_max) throw ConfigError("account bounds are inverted");

  if (fiat) {
    if (replacement != Replacement::Immediate) throw ConfigError("fiat economies are closed loop");
    if (teams.empty()) throw ConfigError("fiat economies need teams");
    if (fiat->total_units < 0 || fiat->deposit_cap < 0 || fiat->packet_cap < 0)
      throw ConfigError("fiat amounts must be non-negative");
    std::vector<int> used(flows.size(), 0);
    for (const auto& t : teams) {
      if (t.business >= flows.size() || t.economy >= flows.size() || t.business == t.economy)
        throw ConfigError("team references an invalid flow");
      if (flows[t.business].window != 1 || flows[t.economy].window != 1)
        throw ConfigError("team flows use window size 1");
      if (++used[t.business] > 1 || ++used[t.economy] > 1) throw ConfigError("a flow belongs to two teams");
    }
  } else if (!teams.empty()) {
    throw ConfigError("teams require a fiat configuration");
  }
}

Economy::Economy(EconomyConfig config) : config_(std::move(config)) {
  for (std::size_t i = 0; i < config_.flows.size(); ++i) config_.flows[i].id = static_cast<FlowId>(i);
  config_.validate();

  const CounterRng base(config_.seed);
  pair_rng_ = base.split(1);
  fail_rng_ = base.split(2);
  order_rng_ = base.split(3);
  fiat_rng_ = base.split(4);

  state_.capacity = config_.queue_size;
  state_.seed = config_.seed;
  ctx_.bounds = config_.bounds;
  next_seq_.assign(config_.flows.size(), 0);
  settled_.assign(config_.flows.size(), Money{});
  team_of_.assign(config_.flows.size(), std::nullopt);

  if (config_.fiat) {
    const auto& t0 = config_.teams.front();
    const Money unit_value = Money::from_micros(
        (config_.flows[t0.business].value.cost.micros() + config_.flows[t0.economy].value.cost.micros()) / 2);
    if (unit_value.micros() <= 0) throw ConfigError("fiat unit value (c_e + c_b) / 2 must be positive");
    ctx_.basis.fiat_unit_value = unit_value;
    ctx_.bounds.account_min = Money{};
    ctx_.bounds.account_max = Money::units(config_.fiat->packet_cap);
    deposits_.assign(config_.teams.size(), 0);
    team_reset_.assign(config_.teams.size(), false);
    for (std::size_t t = 0; t < config_.teams.size(); ++t) {
      team_of_[config_.teams[t].business] = t;
      team_of_[config_.teams[t].economy] = t;
    }
    // Initial fiat is spread over the deposits unit by unit.
    for (std::int64_t u = 0; u < config_.fiat->total_units; ++u) {
      const std::size_t t = static_cast<std::size_t>(u) % deposits_.size();
      if (deposits_[t] < config_.fiat->deposit_cap) {
        ++deposits_[t];
      } else {
        ++escrow_;
      }
    }
  }

  if (config_.pairing == PairingMode::Pipelined && config_.queue_size >= 2) {
    pipeline_.emplace(config_.queue_size - 1);
    // Warm the pipeline so every trading period receives a permutation.
    for (std::size_t i = 0; i + 1 < pipeline_->size(); ++i) pipeline_->step(pair_rng_);
  }

  report_.flows.resize(config_.flows.size());
  for (const auto& f : config_.flows) {
    report_.flows[f.id].flow = f.id;
    report_.flows[f.id].name = f.name;
  }

  // The initial population enters together in round 1.
  for (const auto& f : config_.flows)
    for (int w = 0; w < f.window; ++w) pending_.push_back({new_packet(f.id, Money{}), 1});
}

Packet Economy::new_packet(FlowId flow, Money account) {
  Packet p;
  p.id = next_id_++;
  p.flow = flow;
  p.seq = next_seq_[flow]++;
  p.inv.account = account;
  p.seller = config_.flows[flow].policy.seller_by_sequence(p.seq);
  return p;
}

bool Economy::finished() const {
  if (config_.replacement == Replacement::Drain) return state_.round > 0 && state_.slots.empty() && pending_.empty() && !serving_;
  if (config_.rounds > 0 && state_.round >= config_.rounds) return true;
  if (config_.deliveries > 0 && report_.delivered() >= config_.deliveries) return true;
  return false;
}

RoundEvents Economy::run_round() {
  RoundEvents ev;
  ev.round = ++state_.round;

  if (serving_) {
    Packet served = std::move(state_.slots.front());
    state_.slots.erase(state_.slots.begin());
    deliver(std::move(served), ev);
  }
  for (std::size_t i = 0; i < state_.slots.size(); ++i) {
    state_.slots[i].inv.position = static_cast<Rounds>(i);
    state_.slots[i].inv.delay += 1;
  }

  std::vector<Packet> entrants;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->release <= state_.round) {
      entrants.push_back(std::move(it->packet));
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  const bool random_order = state_.round > 1 || config_.shuffle_initial;
  if (entrants.size() > 1 && random_order) {
    const Permutation order = fisher_yates(order_rng_, entrants.size());
    std::vector<Packet> shuffled;
    shuffled.reserve(entrants.size());
    for (auto idx : order) shuffled.push_back(std::move(entrants[idx]));
    entrants = std::move(shuffled);
  }
  for (auto& p : entrants) {
    p.inv.position = static_cast<Rounds>(state_.slots.size());
    p.inv.delay = 1;
    p.entry_position = p.inv.position;
    p.entered = state_.round;
    state_.slots.push_back(std::move(p));
  }
  ev.entrants = static_cast<int>(entrants.size());
  if (state_.slots.size() > state_.capacity) throw std::logic_error("queue overflow: more packets than capacity");

  if (config_.fiat) {
    redistribute_escrow(ev);
    detect_team_failures(ev);
  }

  if (state_.round > 1 && is_zero_state()) {
    ev.zero_state = true;
    ++report_.zero_state_events;
  }

  if (state_.slots.size() >= 3) {
    for (int p = 0; p < config_.trading_periods; ++p) trading_period(p, ev);
  }

  serving_ = !state_.slots.empty();
  ev.served = serving_;
  if (measuring()) {
    ++report_.measured_rounds;
    if (!ev.delivered) ++report_.idle_rounds;
    if (config_.record_series) report_.wealth_series.push_back(ev.delivered ? ev.delivered->value.to_double() : 0.0);
  }
  return ev;
}

void Economy::deliver(Packet served, RoundEvents& ev) {
  const FlowSpec& flow = config_.flows[served.flow];
  Rounds failure = 0;
  if (config_.failure_probability > 0.0 && state_.capacity >= 2 && config_.replacement == Replacement::Immediate) {
    if (auto f = inject_failure(fail_rng_, config_.failure_probability, state_.capacity)) {
      failure = *f;
      ++report_.failures;
    }
  }
  served.failure_delay = failure;
  const Rounds delay = served.inv.delay + failure;
  const Rounds expected =
      packet_delay(served.entry_position, served.inv.rounds_sold, served.inv.rounds_bought) + failure;
  if (delay != expected) throw std::logic_error("delay identity violated for packet " + std::to_string(served.id));

  Delivery d;
  d.packet = served.id;
  d.flow = served.flow;
  d.delay = delay;
  d.value = packet_value(flow.value, delay);
  d.account = served.inv.account;
  d.entry_position = served.entry_position;
  d.rounds_sold = served.inv.rounds_sold;
  d.rounds_bought = served.inv.rounds_bought;
  d.failure_delay = failure;

  if (measuring()) {
    auto& s = report_.flows[served.flow];
    ++s.delivered;
    s.delay_sum += static_cast<double>(delay);
    s.delay_sq_sum += static_cast<double>(delay) * static_cast<double>(delay);
    s.value_sum += d.value.to_double();
    report_.total_value += d.value.to_double();
  }

  if (config_.replacement == Replacement::Immediate) {
    Packet successor = new_packet(served.flow, Money{});
    if (config_.fiat) {
      settle_fiat_on_delivery(served, successor);
    } else {
      settled_[served.flow] += served.inv.account;
    }
    pending_.push_back({std::move(successor), state_.round + failure});
  } else {
    settled_[served.flow] += served.inv.account;
  }
  ev.delivered = d;
}

void Economy::settle_fiat_on_delivery(const Packet& served, Packet& successor) {
  const std::int64_t carried = served.inv.account.micros() / Money::kScale;
  const auto team = team_of_[served.flow];
  if (!team) {
    successor.inv.account = Money::units(carried);
    return;
  }
  std::int64_t& deposit = deposits_[*team];
  if (config_.teams[*team].economy == served.flow) {
    const std::int64_t put = std::min(carried, config_.fiat->deposit_cap - deposit);
    deposit += put;
    successor.inv.account = Money::units(carried - put);
  } else {
    const std::int64_t take = std::min(deposit, config_.fiat->packet_cap - carried);
    deposit -= take;
    successor.inv.account = Money::units(carried + take);
  }
}

void Economy::redistribute_escrow(RoundEvents& ev) {
  if (escrow_ == 0) return;
  const Money cap = Money::units(config_.fiat->packet_cap);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < state_.slots.size(); ++i)
    if (state_.slots[i].inv.account < cap) open.push_back(i);
  std::int64_t moved = 0;
  while (escrow_ > 0 && !open.empty()) {
    const auto k = static_cast<std::size_t>(fiat_rng_.uniform(0, open.size() - 1));
    Packet& p = state_.slots[open[k]];
    p.inv.account += Money::units(1);
    --escrow_;
    ++moved;
    if (p.inv.account >= cap) {
      open[k] = open.back();
      open.pop_back();
    }
  }
  if (moved > 0) {
    ev.redistributed_units = moved;
    ++report_.redistributions;
  }
}

void Economy::detect_team_failures(RoundEvents& ev) {
  for (std::size_t t = 0; t < config_.teams.size(); ++t) {
    Pending* business = nullptr;
    Pending* economy = nullptr;
    for (auto& p : pending_) {
      if (p.release <= state_.round) continue;
      if (p.packet.flow == config_.teams[t].business) business = &p;
      if (p.packet.flow == config_.teams[t].economy) economy = &p;
    }
    if (!business || !economy) {
      team_reset_[t] = false;
      continue;
    }
    if (team_reset_[t]) continue;
    team_reset_[t] = true;
    escrow_ += deposits_[t] + business->packet.inv.account.micros() / Money::kScale +
               economy->packet.inv.account.micros() / Money::kScale;
    deposits_[t] = 0;
    business->packet.inv.account = Money{};
    economy->packet.inv.account = Money{};
    ++ev.team_failures;
    ++report_.team_failures;
  }
}

void Economy::trading_period(int period, RoundEvents& ev) {
  ctx_.flows = &config_.flows;
  ctx_.round = state_.round;
  ctx_.period = period;

  Permutation perm;
  if (pipeline_) {
    auto emitted = pipeline_->step(pair_rng_);
    if (!emitted) throw std::logic_error("shuffle pipeline did not emit a permutation");
    perm = std::move(*emitted);
  } else {
    perm = fisher_yates(pair_rng_, state_.slots.size() - 1);
  }
  const Pairing pairing = pairing_from_permutation(perm);
  for (const auto& [x, y] : pairing.pairs) {
    const std::size_t a = 1 + x;
    const std::size_t b = 1 + y;
    if (a >= state_.slots.size() || b >= state_.slots.size()) continue;
    if (auto trade = negotiate(state_.slots[a], state_.slots[b], ctx_)) {
      execute_trade(state_, *trade, ctx_.bounds);
      ev.trades.push_back(*trade);
      ++report_.trades;
    }
  }
}

bool Economy::is_zero_state() const {
  if (state_.slots.size() != state_.capacity) return false;
  return std::all_of(state_.slots.begin(), state_.slots.end(),
                     [](const Packet& p) { return p.inv.delay == 1 && p.inv.account == Money{}; });
}

Money Economy::total_money() const {
  Money total;
  for (const auto& p : state_.slots) total += p.inv.account;
  for (const auto& p : pending_) total += p.packet.inv.account;
  for (const auto& m : settled_) total += m;
  return total;
}

std::int64_t Economy::total_fiat() const {
  std::int64_t total = escrow_;
  for (auto d : deposits_) total += d;
  for (const auto& p : state_.slots) total += p.inv.account.micros() / Money::kScale;
  for (const auto& p : pending_) total += p.packet.inv.account.micros() / Money::kScale;
  return total;
}

SimulationReport Economy::report() const {
  SimulationReport r = report_;
  r.rounds = state_.round;
  r.wealth_rate = r.measured_rounds > 0 ? r.total_value / static_cast<double>(r.measured_rounds) : 0.0;
  r.money_total = total_money();
  r.fiat_total = config_.fiat ? total_fiat() : 0;
  return r;
}

SimulationReport Economy::run() {
  while (!finished()) run_round();
  return report();
}

SimulationReport run_scenario1(const EconomyConfig& config) {
  if (config.fiat) throw ConfigError("scenario 1 does not use fiat money");
  for (const auto& f : config.flows)
    if (f.kind != FlowKind::WindowBased) throw ConfigError("scenario 1 flows are window-based");
  Economy e(config);
  return e.run();
}

SimulationReport run_scenario2(const EconomyConfig& config) {
  if (!config.fiat) throw ConfigError("scenario 2 needs a fiat configuration");
  Economy e(config);
  return e.run();
}

EconomyConfig make_team_economy(std::size_t teams, const ValueFunction& business, const ValueFunction& economy,
                                std::int64_t fiat_total) {
  EconomyConfig c;
  c.queue_size = 2 * teams;
  for (std::size_t t = 0; t < teams; ++t) {
    FlowSpec b{static_cast<FlowId>(2 * t), "business", FlowKind::WindowBased, 1, 0.0, business,
               {TradeMode::BuyOnly, std::nullopt}};
    FlowSpec e{static_cast<FlowId>(2 * t + 1), "economy", FlowKind::WindowBased, 1, 0.0, economy,
               {TradeMode::SellOnly, std::nullopt}};
    c.flows.push_back(b);
    c.flows.push_back(e);
    c.teams.push_back({b.id, e.id});
  }
  c.fiat = FiatConfig{};
  c.fiat->total_units = fiat_total;
  return c;
}

}  // namespace pecon
