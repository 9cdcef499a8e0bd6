#pragma once

#include <cctype>
#include <cmath>
#include <string>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

#include "memwave/error.hpp"

namespace memwave {

using Rational = boost::multiprecision::cpp_rational;

/// Exact rational from a decimal literal such as "1.5", "-2", "3.25e-1".
inline Rational rational_from_decimal(const std::string& text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  boost::multiprecision::cpp_int digits = 0;
  int frac_digits = 0;
  bool seen_digit = false, seen_point = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      seen_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw ConfigError("not a decimal number: '" + text + "'");
  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    try {
      std::size_t used = 0;
      exponent = std::stoi(text.substr(i + 1), &used);
      i += 1 + used;
    } catch (const std::exception&) {
      throw ConfigError("bad exponent in '" + text + "'");
    }
  }
  if (i != text.size()) throw ConfigError("trailing characters in '" + text + "'");
  exponent -= frac_digits;
  Rational r(digits);
  const boost::multiprecision::cpp_int ten_pow = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                            static_cast<unsigned>(std::abs(exponent)));
  r = exponent >= 0 ? r * Rational(ten_pow) : r / Rational(ten_pow);
  return negative ? Rational(-r) : r;
}

template <class S>
long double to_real(const S& x) {
  if constexpr (std::is_floating_point_v<S>)
    return static_cast<long double>(x);
  else
    return x.template convert_to<long double>();
}

template <class S>
S pow_int(S base, int e) {
  S out = S(1);
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace memwave
