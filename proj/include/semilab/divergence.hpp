#pragma once

#include "semilab/environment.hpp"
#include "semilab/interval.hpp"
#include "semilab/verdict.hpp"

#include <optional>
#include <span>
#include <vector>

namespace semilab {

using Row = std::vector<Rational>;

/// sum_i (sqrt p_i - sqrt q_i)^2. Square roots of perfect squares stay exact,
/// so h(p, p) is the point 0.
Interval hellinger_step(std::span<const Rational> p, std::span<const Rational> q,
                        mpfr_prec_t precision = kDefaultPrecision);

/// N = sum_i sqrt(p_i q_i) for a measure row p and a semimeasure row q.
Interval bhattacharyya_step(std::span<const Rational> p, std::span<const Rational> q,
                            mpfr_prec_t precision = kDefaultPrecision);

/// N <= 1 - h/2 and 1 - h/2 <= exp(-h/2) for one row pair. The first link
/// is decided on the exact difference (1 - Sigma q)/2 when the intervals
/// overlap. Precision escalates from `start` up to `cap`.
std::vector<Verdict> row_inequality(std::span<const Rational> p, std::span<const Rational> q,
                                    mpfr_prec_t start = kDefaultPrecision, mpfr_prec_t cap = kMaxPrecision);

/// sum_i |p_i^k - q_i^k|^(1/k); equals hellinger_step at k = 1/2.
Interval kappa_step(std::span<const Rational> p, std::span<const Rational> q, const Rational& kappa,
                    mpfr_prec_t precision = kDefaultPrecision);

struct TraceStep {
  std::size_t t = 0;
  Interval h;
  Interval cumulative;
  /// nu(omega_t | omega_<t) / mu(omega_t | omega_<t).
  Rational ratio;
  /// max_a |nu(a | omega_<t) - mu(a | omega_<t)|.
  Rational max_diff;
};

struct HellingerTrace {
  std::vector<TraceStep> steps;
};

/// Per-step Hellinger distance between the posteriors of nu and mu along
/// omega_{1:n}. Throws undefined_posterior when nu or mu vanishes on the path.
HellingerTrace hellinger_trace(const Environment& nu, const Environment& mu, const Word& omega, std::size_t n,
                               mpfr_prec_t precision = kDefaultPrecision);

struct ExpectedSums {
  /// sum_t E[(sqrt(nu_t/mu_t) - 1)^2]
  Interval sqrt_ratio_sum;
  /// sum_t E[h_t]
  Interval hellinger_sum;
  /// hellinger_sum - sqrt_ratio_sum, exactly: the expected nu-mass on
  /// symbols that mu excludes.
  Rational gap;
};

/// Exact expectation over the mu-support paths of length n.
ExpectedSums expected_hellinger_sums(const Environment& nu, const Environment& mu, std::size_t n,
                                     mpfr_prec_t precision = kDefaultPrecision);

/// E_mu[exp(1/2 sum_{t<=n} g_t)] where g_t = sum_a |nu_t^k - mu_t^k|^(1/k).
Interval expected_exp_half_sum(const Environment& nu, const Environment& mu, std::size_t n, const Rational& kappa,
                               mpfr_prec_t precision = kDefaultPrecision);

/// The three links sqrt-ratio sum <= Hellinger sum <= 2 ln E[exp(H/2)] <=
/// ln 1/w, escalating precision while any link is inconclusive.
std::vector<Verdict> hellinger_bound_chain(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w,
                                 mpfr_prec_t start = kDefaultPrecision);

/// w^k E[exp(1/2 sum g_t)] <= 1.
Verdict kappa_bound(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w,
                    const Rational& kappa, mpfr_prec_t start = kDefaultPrecision);

/// Throws not_dominated unless nu(x) >= w mu(x) on every mu-support string
/// of length <= n.
void check_dominance(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w);

struct TailReport {
  Rational exceed_mass;
  Rational inconclusive_mass;
  Interval threshold;
  Interval bound;
  Verdict verdict;
};

/// P[sum_{t<=n} h_t >= ln 1/w + c] <= exp(-c/2).
TailReport markov_tail_check(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w,
                             const Rational& c, mpfr_prec_t start = kDefaultPrecision);

/// Two or three vectors with beta: h(p,q) <= m [(1+b) h(p,r) + (1+1/b) h(r,q)]
/// (r = q when only two are given). Otherwise h(p^1,p^m) <= m 3 sum_k k^2
/// h(p^{k-1},p^k). `multiplier` scales the right-hand side.
Verdict chain_inequality(const std::vector<Row>& vectors, std::optional<Rational> beta,
                         const Rational& multiplier = 1, mpfr_prec_t start = kDefaultPrecision);

struct PathCheck {
  std::size_t paths = 0;
  std::size_t holds = 0;
  std::size_t fails = 0;
  std::size_t inconclusive = 0;
  mpfr_prec_t precision = kDefaultPrecision;
  Outcome outcome = Outcome::holds;
};

/// Per path of length n: mu sqrt(w) exp(1/2 sum h_t) <= sqrt(mu nu_{1:n}) / prod N_t,
/// with nu_{1:n} the product of nu's posteriors along the path.
PathCheck product_identity_check(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w,
                                 mpfr_prec_t start = kDefaultPrecision);

}  // namespace semilab
