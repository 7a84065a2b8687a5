#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace chainforge {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw ParameterError("zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

namespace rational_detail {

// Decimal integer text to BigInt. Leading zeros are stripped first because the BigInt
// string constructor reads a leading 0 as an octal prefix.
inline BigInt decimal_integer(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) throw ParameterError("empty integer");
  for (char c : text)
    if (c < '0' || c > '9') throw ParameterError("not a decimal integer: '" + std::string(text) + "'");
  const auto first = text.find_first_not_of('0');
  BigInt value = first == std::string_view::npos ? BigInt(0) : BigInt(std::string(text.substr(first)));
  return negative ? BigInt(-value) : value;
}

}  // namespace rational_detail

/// Parses "3", "-3/4" or a plain decimal such as "0.125" exactly.
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw ParameterError("empty rational");
  std::string s(text);
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      BigInt num = rational_detail::decimal_integer(std::string_view(s).substr(0, slash));
      BigInt den = rational_detail::decimal_integer(std::string_view(s).substr(slash + 1));
      if (den == 0) throw ParameterError("zero denominator in '" + s + "'");
      if (den < 0) {
        num = -num;
        den = -den;
      }
      return Rational(num, den);
    }
    bool negative = false;
    std::size_t pos = 0;
    if (s[0] == '-' || s[0] == '+') {
      negative = s[0] == '-';
      pos = 1;
    }
    std::string digits;
    BigInt den = 1;
    bool seen_dot = false;
    for (; pos < s.size(); ++pos) {
      char c = s[pos];
      if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else if (c >= '0' && c <= '9') {
        digits.push_back(c);
        if (seen_dot) den *= 10;
      } else {
        throw ParameterError("not a rational: '" + s + "'");
      }
    }
    if (digits.empty()) throw ParameterError("not a rational: '" + s + "'");
    BigInt num = rational_detail::decimal_integer(digits);
    if (negative) num = -num;
    return Rational(num, den);
  } catch (const ParameterError&) {
    throw;
  } catch (const std::exception&) {
    throw ParameterError("not a rational: '" + s + "'");
  }
}

inline std::string to_string(const Rational& q) {
  auto num = boost::multiprecision::numerator(q);
  auto den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline BigInt binomial(std::int64_t n, std::int64_t r) {
  if (r < 0 || n < 0 || r > n) return 0;
  if (r > n - r) r = n - r;
  BigInt acc = 1;
  for (std::int64_t i = 1; i <= r; ++i) {
    acc *= (n - r + i);
    acc /= i;
  }
  return acc;
}

inline std::uint64_t binomial_u64(std::int64_t n, std::int64_t r) {
  BigInt b = binomial(n, r);
  if (b > BigInt(std::numeric_limits<std::uint64_t>::max())) {
    throw BudgetExceeded("binomial coefficient overflows 64 bits");
  }
  return b.convert_to<std::uint64_t>();
}

}  // namespace chainforge
