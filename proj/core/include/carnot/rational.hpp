#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>

#include "carnot/errors.hpp"

namespace carnot {

/// Exact scalar for structure constants. Every catalog constant is a small
/// dyadic or twelfth, so 64-bit numerators are ample.
using Rational = boost::rational<long long>;

inline double to_double(const Rational& q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

/// Parse "p", "-p" or "p/q". Used by the algebra-definition loader.
inline Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(text));
    const long long num = std::stoll(text.substr(0, slash));
    const long long den = std::stoll(text.substr(slash + 1));
    if (den == 0) throw InvalidInput("rational with zero denominator: " + text);
    return Rational(num, den);
  } catch (const std::invalid_argument&) {
    throw InvalidInput("unparseable rational: " + text);
  } catch (const std::out_of_range&) {
    throw InvalidInput("rational out of range: " + text);
  }
}

}  // namespace carnot
