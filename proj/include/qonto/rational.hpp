#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qonto {

/// Exact ratio of two counts (supports, confidences, scores).
using Ratio = boost::rational<std::int64_t>;

/// Arbitrary-precision rational for sums over many ratios with unrelated
/// denominators (band averages over hundreds of thousands of rules).
using BigRatio = boost::multiprecision::cpp_rational;

inline BigRatio to_big(const Ratio& r) { return BigRatio(r.numerator()) / BigRatio(r.denominator()); }

inline double to_double(const Ratio& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline double to_double(const BigRatio& r) { return r.convert_to<double>(); }

/// Parses a plain decimal literal such as "0.18518", "-2" or "3." into an
/// exact ratio. Throws std::invalid_argument on anything else.
inline BigRatio parse_decimal(const std::string& s) {
  using boost::multiprecision::cpp_int;
  std::size_t i = 0;
  const bool negative = !s.empty() && s[0] == '-';
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) ++i;
  cpp_int num = 0, den = 1;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.' && !dot) {
      dot = true;
    } else if (c >= '0' && c <= '9') {
      num = num * 10 + (c - '0');
      if (dot) den *= 10;
      digits = true;
    } else {
      throw std::invalid_argument("not a decimal number: '" + s + "'");
    }
  }
  if (!digits) throw std::invalid_argument("not a decimal number: '" + s + "'");
  return BigRatio(negative ? cpp_int(-num) : num, den);
}

namespace detail {

inline std::string format_scaled(const boost::multiprecision::cpp_int& scaled, int places) {
  std::string digits = scaled.str();
  if (places == 0) return digits;
  if (static_cast<int>(digits.size()) <= places) digits.insert(0, places + 1 - digits.size(), '0');
  digits.insert(digits.size() - places, ".");
  return digits;
}

}  // namespace detail

/// Renders a non-negative rational with `places` decimals, rounding half up.
inline std::string format_decimal(const BigRatio& r, int places) {
  using boost::multiprecision::cpp_int;
  cpp_int scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  const cpp_int n = numerator(r) * scale * 2 + denominator(r);
  const cpp_int q = n / (denominator(r) * 2);
  return detail::format_scaled(q, places);
}

inline std::string format_decimal(const Ratio& r, int places) { return format_decimal(to_big(r), places); }

/// Renders a non-negative rational with `places` decimals, truncating.
inline std::string truncate_decimal(const BigRatio& r, int places) {
  using boost::multiprecision::cpp_int;
  cpp_int scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  return detail::format_scaled(cpp_int(numerator(r) * scale / denominator(r)), places);
}

inline std::string truncate_decimal(const Ratio& r, int places) { return truncate_decimal(to_big(r), places); }

/// Exact textual form "n/d" (or "n" when d = 1), used where artifacts must
/// be re-read without loss.
inline std::string format_exact(const Ratio& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace qonto
