#include "pecon/analysis.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

namespace pecon::analysis {

namespace {

void require_q(int q) {
  if (q < 3) throw std::domain_error("delay analysis needs q >= 3");
}

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

double upper_effective(int q, double b) {
  return (-1.0 + 2.0 * b + 2.0 * std::sqrt(2.0 * b * (q - 2))) / (2.0 * b);
}

double lower_effective(int q, double b) {
  const double disc = 1.0 - 8.0 * b + 4.0 * b * q;
  if (disc < 0) throw std::domain_error("lower delay bound undefined: 1 - 8b + 4bq < 0");
  return (-1.0 + 2.0 * b + std::sqrt(disc)) / (2.0 * b);
}

}  // namespace

double exact_expected_delay(int q) {
  require_q(q);
  // The summand at s = q needs (-1)!, so the series stops at q - 1; s = 1 is zero.
  const double log_base = std::log(static_cast<double>(q - 2));
  const double log_fact = std::lgamma(static_cast<double>(q - 1));  // log (q-2)!
  CompensatedSum total;
  for (int s = 2; s <= q - 1; ++s) {
    const double log_term = std::log(static_cast<double>(s)) + std::log(static_cast<double>(s - 1)) - s * log_base +
                            log_fact - std::lgamma(static_cast<double>(q - s));
    total.add(std::exp(log_term));
  }
  return total.value();
}

double delay_upper_bound(int q, int b) {
  require_q(q);
  if (b < 1) throw std::domain_error("delay bounds need b >= 1");
  return upper_effective(q, b);
}

double delay_upper_bound_c(int q, double c) {
  require_q(q);
  if (!(c >= 1.0)) throw std::domain_error("delay bounds need c >= 1");
  return 1.0 - c / 2.0 + std::sqrt(2.0 * c * (q - 2));
}

double delay_lower_bound(int q, int b) {
  require_q(q);
  if (b < 1) throw std::domain_error("delay bounds need b >= 1");
  return lower_effective(q, b);
}

double delay_lower_bound_c(int q, double c) {
  require_q(q);
  if (!(c >= 1.0)) throw std::domain_error("delay bounds need c >= 1");
  const double disc = c * c - 8.0 * c + 4.0 * q * c;
  if (disc < 0) throw std::domain_error("lower delay bound undefined: c^2 - 8c + 4qc < 0");
  return (2.0 - c) / 2.0 + std::sqrt(disc) / 2.0;
}

DelayBounds delay_bounds(int q, int b, double c) {
  require_q(q);
  if (b < 1 || !(c >= 1.0)) throw std::domain_error("delay bounds need b >= 1 and c >= 1");
  const double effective = static_cast<double>(b) / c;
  return {lower_effective(q, effective), upper_effective(q, effective), b != 1 && c != 1.0};
}

double expected_min_uniform(int k, double U) {
  if (k < 1 || !(U > 0)) throw std::domain_error("expected_min_uniform needs k >= 1 and U > 0");
  return U / (k + 1);
}

WealthScenarioParams WealthScenarioParams::make(int n_e, int n_b, double v_e, double v_b, double c_e, double c_b,
                                                std::optional<double> d_cap) {
  WealthScenarioParams p{n_e, n_b, v_e, v_b, c_e, c_b, n_e + n_b, 0};
  p.d_cap = d_cap ? *d_cap : 4.0 * p.q;
  p.validate();
  return p;
}

void WealthScenarioParams::validate() const {
  if (n_e < 0 || n_b < 0 || n_e + n_b != q || q < 1) throw std::domain_error("wealth params: q must equal n_e + n_b");
  if (d_cap < q) throw std::domain_error("wealth params: d_cap must be at least q");
}

double wealth_no_trades(const WealthScenarioParams& p) {
  p.validate();
  const double q = p.q;
  return p.n_e / q * (p.v_e - p.c_e * q) + p.n_b / q * (p.v_b - p.c_b * q);
}

double wealth_ideal(const WealthScenarioParams& p) {
  p.validate();
  const double cap = p.d_cap;
  if (!(cap > p.n_e)) throw std::domain_error("wealth_ideal needs d_cap > n_e");
  const double economy = p.n_e / cap * (p.v_e - p.c_e * cap);
  if (p.n_b == 0) return economy;
  const double share = (cap - p.n_e) / cap;
  return economy + share * (p.v_b - p.c_b * p.n_b * cap / (cap - p.n_e));
}

double wealth_ideal_feasible(const WealthScenarioParams& p, double d_b_min) {
  p.validate();
  const double r_b = p.n_b / d_b_min;
  if (!(r_b < 1.0)) throw std::domain_error("wealth_ideal_feasible: business packets would need more than the link");
  const double r_e = 1.0 - r_b;
  const double d_e = p.n_e / r_e;
  if (d_e > p.d_cap) throw std::domain_error("wealth_ideal_feasible: economy delay would exceed d_cap");
  return r_e * (p.v_e - p.c_e * d_e) + r_b * (p.v_b - p.c_b * d_b_min);
}

std::vector<Rational> cyclic_schedule_wealths(const std::vector<CyclicFlow>& flows, int max_period) {
  const int n = static_cast<int>(flows.size());
  if (n == 0) throw std::invalid_argument("cyclic_schedule_wealths: no flows");
  std::set<Rational> seen;
  std::vector<int> seq;

  auto evaluate = [&](int period) {
    std::vector<int> last(n, -1), first(n, -1);
    std::int64_t total = 0;
    for (int t = 0; t < period; ++t) {
      const int f = seq[t];
      if (first[f] < 0) first[f] = t;
      if (last[f] >= 0) {
        const std::int64_t gap = t - last[f];
        if (gap > flows[f].d_max) return;
        total += flows[f].v_max - flows[f].cost * gap;
      }
      last[f] = t;
    }
    for (int f = 0; f < n; ++f) {
      if (first[f] < 0) return;  // every flow has a packet in the queue
      const std::int64_t gap = first[f] + period - last[f];
      if (gap > flows[f].d_max) return;
      total += flows[f].v_max - flows[f].cost * gap;
    }
    seen.insert(Rational(total, period));
  };

  std::function<void(int, int)> extend = [&](int pos, int period) {
    if (pos == period) {
      evaluate(period);
      return;
    }
    for (int f = 0; f < n; ++f) {
      seq[pos] = f;
      extend(pos + 1, period);
    }
  };

  for (int period = n; period <= max_period; ++period) {
    seq.assign(period, 0);
    // Fix the first slot to flow 0: every cyclic schedule has a rotation that starts with it.
    extend(1, period);
  }
  return {seen.begin(), seen.end()};
}

bool equal_vmax_schedule_invariance(const std::vector<CyclicFlow>& flows, int max_period) {
  return cyclic_schedule_wealths(flows, max_period).size() <= 1;
}

std::vector<ClassRate> bandwidth_share_rates(int n_economy, double economy_deadline, int n_business) {
  if (n_economy < 0 || n_business < 0 || n_economy + n_business == 0)
    throw std::domain_error("bandwidth_share_rates: need at least one packet");
  std::vector<ClassRate> out;
  double residual = 1.0;
  if (n_economy > 0) {
    if (!(economy_deadline > 0)) throw std::domain_error("bandwidth_share_rates: economy deadline must be positive");
    const double r = 1.0 / economy_deadline;
    residual -= n_economy * r;
    out.push_back({"economy", n_economy, r, economy_deadline});
  }
  if (n_business > 0) {
    if (!(residual > 0)) throw std::domain_error("bandwidth_share_rates: no bandwidth left for business packets");
    const double r = residual / n_business;
    out.push_back({"business", n_business, r, 1.0 / r});
  } else if (residual < -1e-12) {
    throw std::domain_error("bandwidth_share_rates: economy deadlines oversubscribe the link");
  }
  return out;
}

}  // namespace pecon::analysis
