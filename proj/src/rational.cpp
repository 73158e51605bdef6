#include "semilab/rational.hpp"

#include "semilab/error.hpp"

#include <algorithm>

namespace semilab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::validation: return "validation";
    case ErrorCode::depth_exceeded: return "depth-exceeded";
    case ErrorCode::cap_exceeded: return "cap-exceeded";
    case ErrorCode::undefined_posterior: return "undefined-posterior";
    case ErrorCode::not_a_measure: return "not-a-measure";
    case ErrorCode::not_a_measure_row: return "not-a-measure-row";
    case ErrorCode::not_dominated: return "not-dominated";
    case ErrorCode::normalization: return "normalization";
    case ErrorCode::approximable_not_measure: return "approximable-not-measure";
    case ErrorCode::hypothesis_failed: return "hypothesis-failed";
    case ErrorCode::invalid_k0: return "invalid-k0";
    case ErrorCode::inconclusive_configuration: return "inconclusive-configuration";
    case ErrorCode::needs_larger_tmax: return "needs-larger-t_max";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {

Integer parse_integer(std::string_view digits, std::string_view whole) {
  std::string_view body = digits;
  if (!body.empty() && body.front() == '-') body.remove_prefix(1);
  if (body.empty() || !std::all_of(body.begin(), body.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::parse, "malformed rational '" + std::string(whole) + "'");
  }
  return Integer(std::string(digits), 10);
}

Integer product_tree(std::span<const Integer> v) {
  if (v.empty()) return 1;
  if (v.size() == 1) return v[0];
  const auto mid = v.size() / 2;
  return product_tree(v.first(mid)) * product_tree(v.subspan(mid));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto dot = text.find('.');
  if (dot != std::string_view::npos && text.find('/') == std::string_view::npos) {
    const auto frac = text.substr(dot + 1);
    if (frac.empty() || frac.front() == '-') throw Error(ErrorCode::parse, "malformed rational '" + std::string(text) + "'");
    const std::string digits = std::string(text.substr(0, dot)) + std::string(frac);
    Rational q(parse_integer(digits, text), 1);
    return q / pow(Rational(10), frac.size());
  }
  const auto slash = text.find('/');
  Integer num = parse_integer(text.substr(0, slash), text);
  Integer den = 1;
  if (slash != std::string_view::npos) {
    den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw Error(ErrorCode::parse, "zero denominator in '" + std::string(text) + "'");
  }
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational pow2(long e) {
  Rational r = 1;
  if (e >= 0) {
    mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  }
  return r;
}

Rational pow(const Rational& base, unsigned long e) {
  Integer num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational r;
  // Powers of a canonical fraction stay canonical.
  mpz_swap(mpq_numref(r.get_mpq_t()), num.get_mpz_t());
  mpz_swap(mpq_denref(r.get_mpq_t()), den.get_mpz_t());
  return r;
}

Rational product(std::span<const Rational> factors) {
  if (factors.size() <= 32) {
    Rational r = 1;
    for (const auto& f : factors) r *= f;
    return r;
  }
  std::vector<Integer> nums, dens;
  nums.reserve(factors.size());
  dens.reserve(factors.size());
  for (const auto& f : factors) {
    if (f == 0) return 0;
    nums.push_back(f.get_num());
    dens.push_back(f.get_den());
  }
  Rational r(product_tree(nums), product_tree(dens));
  r.canonicalize();
  return r;
}

bool exact_sqrt(const Rational& q, Rational& root) {
  if (q < 0) return false;
  if (mpz_perfect_square_p(q.get_num_mpz_t()) == 0 || mpz_perfect_square_p(q.get_den_mpz_t()) == 0) return false;
  Integer n, d;
  mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
  mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
  root = Rational(n, d);
  return true;
}

}  // namespace semilab
