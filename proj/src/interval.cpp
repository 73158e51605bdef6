#include "semilab/interval.hpp"

#include "semilab/error.hpp"

#include <algorithm>
#include <vector>

namespace semilab {

namespace {

void promote(mpfr_t lo, mpfr_t hi, mpfr_prec_t p) {
  if (mpfr_get_prec(lo) < p) {
    mpfr_prec_round(lo, p, MPFR_RNDD);
    mpfr_prec_round(hi, p, MPFR_RNDU);
  }
}

std::string format(mpfr_srcptr v, int digits, bool up) {
  char* buf = nullptr;
  const int n = up ? mpfr_asprintf(&buf, "%.*RUe", digits - 1, v) : mpfr_asprintf(&buf, "%.*RDe", digits - 1, v);
  if (n < 0) throw Error(ErrorCode::io, "interval formatting failed");
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

}  // namespace

Interval::Interval(mpfr_prec_t precision) {
  mpfr_init2(lo_, precision);
  mpfr_init2(hi_, precision);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

Interval::Interval(const Rational& q, mpfr_prec_t precision) : Interval(precision) {
  mpfr_set_q(lo_, q.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi_, q.get_mpq_t(), MPFR_RNDU);
}

Interval::Interval(const Interval& other) : Interval(other.precision()) {
  mpfr_set(lo_, other.lo_, MPFR_RNDD);
  mpfr_set(hi_, other.hi_, MPFR_RNDU);
}

Interval::Interval(Interval&& other) noexcept : Interval(other.precision()) {
  mpfr_swap(lo_, other.lo_);
  mpfr_swap(hi_, other.hi_);
}

Interval& Interval::operator=(const Interval& other) {
  if (this != &other) {
    mpfr_set_prec(lo_, other.precision());
    mpfr_set_prec(hi_, other.precision());
    mpfr_set(lo_, other.lo_, MPFR_RNDD);
    mpfr_set(hi_, other.hi_, MPFR_RNDU);
  }
  return *this;
}

Interval& Interval::operator=(Interval&& other) noexcept {
  mpfr_swap(lo_, other.lo_);
  mpfr_swap(hi_, other.hi_);
  return *this;
}

Interval::~Interval() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

Interval Interval::hull(const Rational& lo, const Rational& hi, mpfr_prec_t precision) {
  Interval out(precision);
  mpfr_set_q(out.lo_, lo.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(out.hi_, hi.get_mpq_t(), MPFR_RNDU);
  return out;
}

double Interval::mid_double() const {
  mpfr_t m;
  mpfr_init2(m, precision() + 1);
  mpfr_add(m, lo_, hi_, MPFR_RNDN);
  mpfr_div_2ui(m, m, 1, MPFR_RNDN);
  const double d = mpfr_get_d(m, MPFR_RNDN);
  mpfr_clear(m);
  return d;
}

std::string Interval::lo_string(int digits) const { return format(lo_, digits, false); }
std::string Interval::hi_string(int digits) const { return format(hi_, digits, true); }

bool Interval::contains(const Rational& q) const {
  return mpfr_cmp_q(lo_, q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi_, q.get_mpq_t()) >= 0;
}

double Interval::width() const {
  mpfr_t w;
  mpfr_init2(w, precision());
  mpfr_sub(w, hi_, lo_, MPFR_RNDU);
  const double d = mpfr_get_d(w, MPFR_RNDU);
  mpfr_clear(w);
  return d;
}

Interval& Interval::operator+=(const Interval& o) {
  promote(lo_, hi_, o.precision());
  mpfr_add(lo_, lo_, o.lo_, MPFR_RNDD);
  mpfr_add(hi_, hi_, o.hi_, MPFR_RNDU);
  return *this;
}

Interval& Interval::operator-=(const Interval& o) {
  promote(lo_, hi_, o.precision());
  Interval r(precision());
  mpfr_sub(r.lo_, lo_, o.hi_, MPFR_RNDD);
  mpfr_sub(r.hi_, hi_, o.lo_, MPFR_RNDU);
  return *this = std::move(r);
}

Interval& Interval::operator*=(const Interval& o) {
  promote(lo_, hi_, o.precision());
  const mpfr_prec_t p = precision();
  mpfr_t c[4];
  mpfr_srcptr a[2] = {lo_, hi_};
  mpfr_srcptr b[2] = {o.lo_, o.hi_};
  Interval r(p);
  for (int rnd = 0; rnd < 2; ++rnd) {
    for (int i = 0; i < 4; ++i) {
      mpfr_init2(c[i], p);
      mpfr_mul(c[i], a[i / 2], b[i % 2], rnd == 0 ? MPFR_RNDD : MPFR_RNDU);
    }
    mpfr_ptr target = rnd == 0 ? r.lo_ : r.hi_;
    mpfr_set(target, c[0], MPFR_RNDN);
    for (int i = 1; i < 4; ++i) {
      if (rnd == 0 ? mpfr_less_p(c[i], target) : mpfr_greater_p(c[i], target)) mpfr_set(target, c[i], MPFR_RNDN);
    }
    for (auto& ci : c) mpfr_clear(ci);
  }
  return *this = std::move(r);
}

Interval& Interval::operator/=(const Interval& o) {
  if (mpfr_sgn(o.lo_) <= 0 && mpfr_sgn(o.hi_) >= 0) {
    throw Error(ErrorCode::invalid_argument, "interval division by an interval containing zero");
  }
  promote(lo_, hi_, o.precision());
  Interval inv(precision());
  mpfr_ui_div(inv.lo_, 1, o.hi_, MPFR_RNDD);
  mpfr_ui_div(inv.hi_, 1, o.lo_, MPFR_RNDU);
  return *this *= inv;
}

Interval Interval::operator-() const {
  Interval r(precision());
  mpfr_neg(r.lo_, hi_, MPFR_RNDD);
  mpfr_neg(r.hi_, lo_, MPFR_RNDU);
  return r;
}

Interval Interval::clamp_nonnegative() const {
  Interval r(*this);
  if (mpfr_sgn(r.lo_) < 0) mpfr_set_zero(r.lo_, 1);
  if (mpfr_sgn(r.hi_) < 0) mpfr_set_zero(r.hi_, 1);
  return r;
}

namespace {

using Unary = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

Interval monotone(const Interval& x, Unary f) {
  Interval r(x.precision());
  f(r.lo(), x.lo(), MPFR_RNDD);
  f(r.hi(), x.hi(), MPFR_RNDU);
  return r;
}

}  // namespace

Interval sqrt(const Interval& x) {
  if (mpfr_sgn(x.hi()) < 0) throw Error(ErrorCode::invalid_argument, "square root of a negative interval");
  return monotone(x.clamp_nonnegative(), mpfr_sqrt);
}

Interval exp(const Interval& x) { return monotone(x, mpfr_exp); }

Interval log(const Interval& x) {
  if (mpfr_sgn(x.lo()) <= 0) throw Error(ErrorCode::invalid_argument, "log of a nonpositive interval");
  return monotone(x, mpfr_log);
}

Interval log2(const Interval& x) {
  if (mpfr_sgn(x.lo()) <= 0) throw Error(ErrorCode::invalid_argument, "log2 of a nonpositive interval");
  return monotone(x, mpfr_log2);
}

Interval pow(const Interval& x, const Rational& e) {
  if (e <= 0) throw Error(ErrorCode::invalid_argument, "interval power needs a positive exponent");
  if (!e.get_num().fits_ulong_p() || !e.get_den().fits_ulong_p()) {
    throw Error(ErrorCode::invalid_argument, "interval power exponent too large");
  }
  const unsigned long p = e.get_num().get_ui();
  const unsigned long q = e.get_den().get_ui();
  const Interval base = x.clamp_nonnegative();
  Interval r(x.precision());
  mpfr_ptr lo = r.lo();
  mpfr_ptr hi = r.hi();
  mpfr_pow_ui(lo, base.lo(), p, MPFR_RNDD);
  mpfr_pow_ui(hi, base.hi(), p, MPFR_RNDU);
  if (q != 1) {
    mpfr_rootn_ui(lo, lo, q, MPFR_RNDD);
    mpfr_rootn_ui(hi, hi, q, MPFR_RNDU);
  }
  return r;
}

Interval abs(const Interval& x) {
  if (mpfr_sgn(x.lo()) >= 0) return x;
  if (mpfr_sgn(x.hi()) <= 0) return -x;
  Interval r(x.precision());
  mpfr_set_zero(r.lo(), 1);
  if (mpfr_cmpabs(x.lo(), x.hi()) > 0) {
    mpfr_neg(r.hi(), x.lo(), MPFR_RNDU);
  } else {
    mpfr_set(r.hi(), x.hi(), MPFR_RNDU);
  }
  return r;
}

Interval max(const Interval& a, const Interval& b) {
  Interval r(std::max(a.precision(), b.precision()));
  mpfr_max(r.lo(), a.lo(), b.lo(), MPFR_RNDD);
  mpfr_max(r.hi(), a.hi(), b.hi(), MPFR_RNDU);
  return r;
}

}  // namespace semilab
