#pragma once

#include <boost/rational.hpp>

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "trumlsl/error.hpp"

namespace trumlsl {

/// Exact road-length arithmetic. Positions, lengths, speeds and durations
/// are all rationals so chop split points and stopping distances compare
/// exactly.
using Rational = boost::rational<std::int64_t>;

namespace detail {

inline std::optional<std::int64_t> parse_digits(std::string_view s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::int64_t v = 0;
  for (char ch : s) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
    v = v * 10 + (ch - '0');
  }
  return v;
}

inline std::int64_t pow10(int e) {
  std::int64_t p = 1;
  for (int i = 0; i < e; ++i) p *= 10;
  return p;
}

}  // namespace detail

/// Parses `12`, `-3.25`, `7/4`, `1e-3` or `2.5E2` exactly. Returns nullopt on
/// malformed input.
inline std::optional<Rational> try_parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = detail::parse_digits(text.substr(0, slash));
    auto den = detail::parse_digits(text.substr(slash + 1));
    if (!num || !den || *den == 0) return std::nullopt;
    Rational r(*num, *den);
    return negative ? -r : r;
  }
  int exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    auto ev = detail::parse_digits(exp_part);
    if (!ev || *ev > 17) return std::nullopt;
    exponent = static_cast<int>(exp_negative ? -*ev : *ev);
    text = text.substr(0, e);
  }
  std::string_view int_part = text;
  std::string_view frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) return std::nullopt;
  std::string digits(int_part);
  digits += frac_part;
  // Strip leading zeros so long decimals like 0.000125 still fit.
  std::size_t first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? std::string("0") : digits.substr(first);
  auto mantissa = detail::parse_digits(digits);
  if (!mantissa) return std::nullopt;
  int scale = static_cast<int>(frac_part.size()) - exponent;
  Rational r;
  if (scale >= 0) {
    if (scale > 18) return std::nullopt;
    r = Rational(*mantissa, detail::pow10(scale));
  } else {
    if (-scale > 18) return std::nullopt;
    r = Rational(*mantissa * detail::pow10(-scale));
  }
  return negative ? -r : r;
}

inline Rational parse_rational(std::string_view text) {
  auto r = try_parse_rational(text);
  if (!r) throw Error(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");
  return *r;
}

/// Canonical text form: `5`, `-7/4`. Round-trips through parse_rational.
inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline Rational rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace trumlsl
