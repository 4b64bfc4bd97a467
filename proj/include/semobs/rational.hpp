#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

namespace semobs {

/**
 * Exact ratio of two integers.
 *
 * Metric ratios stay rational until presentation so that comparisons against
 * one-decimal percentage targets never pick up float rounding. Denominator is
 * always positive; value is kept gcd-reduced.
 */
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t n, std::int64_t d);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  double percent() const { return 100.0 * value(); }

  Rational operator+(const Rational& o) const { return of(num * o.den + o.num * den, den * o.den); }
  Rational operator-(const Rational& o) const { return of(num * o.den - o.num * den, den * o.den); }
  Rational operator*(const Rational& o) const { return of(num * o.num, den * o.den); }

  // Exact comparisons via wide cross-multiplication.
  bool operator==(const Rational& o) const;
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// std::nullopt encodes an undefined ratio (0/0). Undefined is explicit,
// never silently reported as 0.
using MaybeRatio = std::optional<Rational>;

// n/d, or undefined when d == 0.
MaybeRatio ratio_or_undefined(std::int64_t n, std::int64_t d);

// Exact rational from a short decimal literal such as "0.80" or "1".
// Thresholds in goal files are human-written decimals; round-tripping them
// through double would put 0.80 a hair above 80% exactly.
Rational rational_from_decimal(const std::string& text);

// Nearest rational with denominator 10^4; used when a threshold arrives as a
// JSON number rather than a string.
Rational rational_from_double(double v);

}  // namespace semobs
