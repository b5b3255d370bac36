#pragma once

// Exact rational arithmetic for the inputs that must never pass through a
// float: the warping ratio d and the coefficient a(n; n_1..n_k). Parsing
// accepts "p/q", plain integers, and finite decimals ("0.25"), all converted
// exactly.

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace lagforge {

using Rational = boost::rational<std::int64_t>;

[[nodiscard]] inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

[[nodiscard]] inline std::string to_string(const Rational& r) {
  std::string s = std::to_string(r.numerator());
  if (r.denominator() != 1) s += "/" + std::to_string(r.denominator());
  return s;
}

namespace detail {

inline std::int64_t parse_int64(std::string_view text, const char* what) {
  if (text.empty()) throw std::invalid_argument(std::string(what) + ": empty number");
  std::size_t pos = 0;
  bool negative = false;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    pos = 1;
  }
  if (pos == text.size()) throw std::invalid_argument(std::string(what) + ": missing digits");
  std::int64_t value = 0;
  for (; pos < text.size(); ++pos) {
    if (!std::isdigit(static_cast<unsigned char>(text[pos])))
      throw std::invalid_argument(std::string(what) + ": invalid digit in '" +
                                  std::string(text) + "'");
    const int digit = text[pos] - '0';
    if (value > (INT64_MAX - digit) / 10)
      throw std::invalid_argument(std::string(what) + ": overflow in '" + std::string(text) + "'");
    value = value * 10 + digit;
  }
  return negative ? -value : value;
}

}  // namespace detail

/// Parse "p/q", "p", or a finite decimal such as "0.25" into an exact rational.
[[nodiscard]] inline Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    const std::int64_t num = detail::parse_int64(text.substr(0, slash), "rational numerator");
    const std::int64_t den = detail::parse_int64(text.substr(slash + 1), "rational denominator");
    if (den == 0) throw std::invalid_argument("rational: zero denominator in '" +
                                              std::string(text) + "'");
    return Rational(num, den);
  }
  const auto dot = text.find('.');
  if (dot == std::string_view::npos)
    return Rational(detail::parse_int64(text, "rational"), 1);

  std::string_view whole = text.substr(0, dot);
  std::string_view frac = text.substr(dot + 1);
  if (frac.size() > 18)
    throw std::invalid_argument("rational: too many decimal digits in '" + std::string(text) +
                                "'");
  bool negative = !whole.empty() && whole[0] == '-';
  std::int64_t whole_value = whole.empty() || whole == "-" || whole == "+"
                                 ? 0
                                 : detail::parse_int64(whole, "rational integer part");
  std::int64_t frac_value = frac.empty() ? 0 : detail::parse_int64(frac, "rational fraction part");
  if (frac_value < 0)
    throw std::invalid_argument("rational: malformed decimal '" + std::string(text) + "'");
  std::int64_t scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  const std::int64_t magnitude = std::abs(whole_value);
  if (magnitude > (INT64_MAX - frac_value) / scale)
    throw std::invalid_argument("rational: overflow in '" + std::string(text) + "'");
  std::int64_t num = magnitude * scale + frac_value;
  if (negative || whole_value < 0) num = -num;
  return Rational(num, scale);
}

}  // namespace lagforge
