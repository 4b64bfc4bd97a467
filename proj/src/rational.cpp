#include "semobs/rational.hpp"

#include <cstdlib>
#include <stdexcept>

#include "semobs/errors.hpp"

namespace semobs {

Rational Rational::of(std::int64_t n, std::int64_t d) {
  if (d == 0) throw Error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return Rational{n, d};
}

bool Rational::operator==(const Rational& o) const {
  return static_cast<__int128>(num) * o.den == static_cast<__int128>(o.num) * den;
}

bool Rational::operator<(const Rational& o) const {
  return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
}

MaybeRatio ratio_or_undefined(std::int64_t n, std::int64_t d) {
  if (d == 0) return std::nullopt;
  return Rational::of(n, d);
}

Rational rational_from_decimal(const std::string& text) {
  std::string s = text;
  bool negative = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  const auto dot = s.find('.');
  std::string whole = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw ConfigError("not a decimal: '" + text + "'");
  for (char c : whole + frac)
    if (c < '0' || c > '9') throw ConfigError("not a decimal: '" + text + "'");
  if (frac.size() > 12) frac.resize(12);

  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  std::int64_t num = (whole.empty() ? 0 : std::strtoll(whole.c_str(), nullptr, 10)) * den +
                     (frac.empty() ? 0 : std::strtoll(frac.c_str(), nullptr, 10));
  return Rational::of(negative ? -num : num, den);
}

Rational rational_from_double(double v) {
  const double scaled = v * 10000.0;
  const auto n = static_cast<std::int64_t>(scaled >= 0 ? scaled + 0.5 : scaled - 0.5);
  return Rational::of(n, 10000);
}

}  // namespace semobs
