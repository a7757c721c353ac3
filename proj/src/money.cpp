#include "pecon/money.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace pecon {

Money Money::from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("money amount must be finite");
  const double scaled = std::round(value * static_cast<double>(kScale));
  if (std::fabs(scaled) > static_cast<double>(max().micros())) throw std::out_of_range("money amount too large");
  return Money(static_cast<std::int64_t>(scaled));
}

std::string Money::str() const {
  const std::int64_t whole = micros_ / kScale;
  std::int64_t frac = micros_ % kScale;
  if (frac == 0) return std::to_string(whole);
  const bool neg = micros_ < 0;
  if (frac < 0) frac = -frac;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frac));
  std::string f(buf);
  while (!f.empty() && f.back() == '0') f.pop_back();
  std::string w = std::to_string(whole < 0 ? -whole : whole);
  return (neg ? "-" : "") + w + "." + f;
}

std::ostream& operator<<(std::ostream& os, Money m) { return os << m.str(); }

namespace {

Int128 floor_div(Int128 n, Int128 d) {
  Int128 q = n / d;
  if ((n % d != 0) && ((n < 0) != (d < 0))) --q;
  return q;
}

}  // namespace

Money ExactPrice::floor() const { return Money::from_micros(static_cast<std::int64_t>(floor_div(num, den))); }

Money ExactPrice::ceil() const { return Money::from_micros(static_cast<std::int64_t>(-floor_div(-num, den))); }

double ExactPrice::to_double() const {
  return static_cast<double>(num) / static_cast<double>(den) / static_cast<double>(Money::kScale);
}

ExactPrice midpoint(const ExactPrice& a, const ExactPrice& b) {
  if (a.den == b.den) return {a.num + b.num, a.den * 2};
  return {a.num * b.den + b.num * a.den, a.den * b.den * 2};
}

}  // namespace pecon
