#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semilab {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "num/den", "num" or a terminating decimal "0.25". Throws Error(ErrorCode::parse) on malformed
/// input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "num/den" form; integers are written with denominator 1.
std::string to_string(const Rational& q);

/// 2^e for any signed exponent.
Rational pow2(long e);

Rational pow(const Rational& base, unsigned long e);

/// Balanced product tree. Much faster than a running product once the
/// factors number in the thousands.
Rational product(std::span<const Rational> factors);

/// Returns true and sets root when q is the square of a rational.
bool exact_sqrt(const Rational& q, Rational& root);

}  // namespace semilab
