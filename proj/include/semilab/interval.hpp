#pragma once

#include "semilab/rational.hpp"

#include <mpfr.h>

#include <string>

namespace semilab {

inline constexpr mpfr_prec_t kDefaultPrecision = 128;
inline constexpr mpfr_prec_t kMaxPrecision = 1024;

/// Closed interval [lo, hi] of binary floats. Every operation rounds lo down
/// and hi up, so the result contains the exact value whenever the operands do.
class Interval {
 public:
  explicit Interval(mpfr_prec_t precision = kDefaultPrecision);
  Interval(const Rational& q, mpfr_prec_t precision);
  Interval(const Interval& other);
  Interval(Interval&& other) noexcept;
  Interval& operator=(const Interval& other);
  Interval& operator=(Interval&& other) noexcept;
  ~Interval();

  /// Hull of [lo, hi] at the given precision, rounded outward.
  static Interval hull(const Rational& lo, const Rational& hi, mpfr_prec_t precision);

  mpfr_prec_t precision() const noexcept { return mpfr_get_prec(lo_); }
  mpfr_srcptr lo() const noexcept { return lo_; }
  mpfr_srcptr hi() const noexcept { return hi_; }
  mpfr_ptr lo() noexcept { return lo_; }
  mpfr_ptr hi() noexcept { return hi_; }
  double lo_double() const { return mpfr_get_d(lo_, MPFR_RNDD); }
  double hi_double() const { return mpfr_get_d(hi_, MPFR_RNDU); }
  double mid_double() const;
  /// Decimal bounds rounded outward, `digits` significant digits.
  std::string lo_string(int digits = 20) const;
  std::string hi_string(int digits = 20) const;

  bool is_point() const { return mpfr_equal_p(lo_, hi_) != 0; }
  bool contains(const Rational& q) const;
  /// hi - lo, rounded up.
  double width() const;

  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);
  Interval& operator/=(const Interval& o);

  friend Interval operator+(Interval a, const Interval& b) { return a += b; }
  friend Interval operator-(Interval a, const Interval& b) { return a -= b; }
  friend Interval operator*(Interval a, const Interval& b) { return a *= b; }
  friend Interval operator/(Interval a, const Interval& b) { return a /= b; }
  Interval operator-() const;

  /// lo >= 0 after clamping: negative lower bounds from rounding become 0.
  Interval clamp_nonnegative() const;

  /// Certainly le: this.hi <= o.lo.
  bool certainly_le(const Interval& o) const { return mpfr_lessequal_p(hi_, o.lo_) != 0; }
  /// Certainly greater: this.lo > o.hi.
  bool certainly_gt(const Interval& o) const { return mpfr_greater_p(lo_, o.hi_) != 0; }

 private:
  mpfr_t lo_;
  mpfr_t hi_;
};

Interval sqrt(const Interval& x);
Interval exp(const Interval& x);
/// Natural log; requires lo > 0.
Interval log(const Interval& x);
Interval log2(const Interval& x);
/// x^e for x >= 0 and rational e > 0, computed as the q-th root of x^p.
Interval pow(const Interval& x, const Rational& e);
Interval abs(const Interval& x);
Interval max(const Interval& a, const Interval& b);

}  // namespace semilab
