#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

namespace pecon {

__extension__ typedef __int128 Int128;

/// Fixed-point money with a resolution of one millionth of a unit.
///
/// Accounts are integers so that conservation checks over millions of trades
/// are exact. Closed-form analysis uses doubles and never touches this type.
class Money {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }
  static constexpr Money units(std::int64_t whole) { return Money(whole * kScale); }
  static Money from_double(double value);

  static constexpr Money max() { return Money(std::numeric_limits<std::int64_t>::max() / 4); }
  static constexpr Money lowest() { return Money(-(std::numeric_limits<std::int64_t>::max() / 4)); }

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }

  constexpr Money operator-() const { return Money(-micros_); }
  constexpr Money& operator+=(Money o) {
    micros_ += o.micros_;
    return *this;
  }
  constexpr Money& operator-=(Money o) {
    micros_ -= o.micros_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return a += b; }
  friend constexpr Money operator-(Money a, Money b) { return a -= b; }
  friend constexpr Money operator*(Money a, std::int64_t k) { return Money(a.micros_ * k); }
  friend constexpr Money operator*(std::int64_t k, Money a) { return Money(a.micros_ * k); }

  friend constexpr auto operator<=>(Money, Money) = default;

  std::string str() const;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

std::ostream& operator<<(std::ostream& os, Money m);

/// An exact price `num / den` in micro-units, den > 0.
///
/// Compensatory prices divide by a delay, so they are kept as fractions until
/// a trade settles on a representable amount.
struct ExactPrice {
  Int128 num = 0;
  std::int64_t den = 1;

  static ExactPrice of(Money m) { return {m.micros(), 1}; }

  Money floor() const;
  Money ceil() const;
  double to_double() const;
  ExactPrice abs() const { return {num < 0 ? -num : num, den}; }

  friend bool operator==(const ExactPrice& a, const ExactPrice& b) { return a.num * b.den == b.num * a.den; }
  friend std::strong_ordering operator<=>(const ExactPrice& a, const ExactPrice& b) {
    const Int128 l = a.num * b.den;
    const Int128 r = b.num * a.den;
    return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
};

/// Midpoint of two exact prices, exact.
ExactPrice midpoint(const ExactPrice& a, const ExactPrice& b);

}  // namespace pecon
