#include "ergolab/rational.hpp"

#include <charconv>
#include <cstdlib>
#include <limits>

#include "ergolab/error.hpp"

namespace ergolab {

namespace {

Rational parse_decimal(const std::string& text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) negative = text[pos++] == '-';
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool fraction = false;
  bool any_digit = false;
  int exponent = 0;
  constexpr std::int64_t limit = std::numeric_limits<std::int64_t>::max() / 10;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (fraction) throw UsageError("malformed decimal '" + text + "'");
      fraction = true;
    } else if (c >= '0' && c <= '9') {
      if (num > limit || (fraction && den > limit)) throw UsageError("decimal too precise: " + text);
      num = num * 10 + (c - '0');
      if (fraction) den *= 10;
      any_digit = true;
    } else if (c == 'e' || c == 'E') {
      exponent = std::atoi(text.c_str() + pos + 1);
      break;
    } else {
      throw UsageError("malformed decimal '" + text + "'");
    }
  }
  if (!any_digit) throw UsageError("malformed decimal '" + text + "'");
  for (; exponent > 0; --exponent) {
    if (num > limit) throw UsageError("decimal out of range: " + text);
    num *= 10;
  }
  for (; exponent < 0; ++exponent) {
    if (den > limit) throw UsageError("decimal too precise: " + text);
    den *= 10;
  }
  return {negative ? -num : num, den};
}

}  // namespace

Rational rational_from_decimal(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return parse_decimal(std::string(buf, res.ptr));
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_decimal(text);
  const Rational num = parse_decimal(text.substr(0, slash));
  const Rational den = parse_decimal(text.substr(slash + 1));
  if (den.numerator() == 0) throw UsageError("zero denominator in '" + text + "'");
  return num / den;
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

bool deviates(std::int64_t count, std::int64_t size, std::int64_t k_pow_s, const Rational& eps) {
  // |count*k^s - size| * den >= num * size * k^s
  __int128 diff = static_cast<__int128>(count) * k_pow_s - size;
  if (diff < 0) diff = -diff;
  return diff * eps.denominator() >= static_cast<__int128>(eps.numerator()) * size * k_pow_s;
}

Rational deviation(std::int64_t count, std::int64_t size, std::int64_t k_pow_s) {
  Rational d = Rational(count, size) - Rational(1, k_pow_s);
  return d < 0 ? -d : d;
}

}  // namespace ergolab
