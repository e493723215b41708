#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace ergolab {

using Rational = boost::rational<std::int64_t>;

/// Exact rational for the shortest decimal that round-trips `value`
/// (0.1 -> 1/10). Throws UsageError when the decimal does not fit in int64.
Rational rational_from_decimal(double value);

/// Parses "3/7", "0.25" or "12".
Rational parse_rational(const std::string& text);

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::string to_string(const Rational& r);

/// |count/size - 1/k_pow_s| >= eps, evaluated exactly.
bool deviates(std::int64_t count, std::int64_t size, std::int64_t k_pow_s, const Rational& eps);

/// |count/size - 1/k_pow_s| as an exact rational.
Rational deviation(std::int64_t count, std::int64_t size, std::int64_t k_pow_s);

}  // namespace ergolab
