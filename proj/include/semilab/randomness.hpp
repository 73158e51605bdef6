#pragma once

#include "semilab/divergence.hpp"
#include "semilab/mixtures.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <vector>

namespace semilab {

struct DeficiencyStep {
  std::size_t n = 0;
  /// M(omega_{1:n}) / mu(omega_{1:n})
  Rational ratio;
  Interval log2_ratio;
  /// max over k <= n of the ratio; its log2 is the running supremum d_n.
  Rational sup_ratio;
  Interval sup_log2;
};

struct DeficiencyTrace {
  std::vector<DeficiencyStep> steps;
  Rational ceiling;
  bool diverging = false;

  const DeficiencyStep& last() const { return steps.back(); }
};

/// The default ceiling 2^64 on the ratio, beyond which a trace is flagged.
Rational default_deficiency_ceiling();

/// log2 of M/mu along omega for n = 0..length. Throws undefined_posterior when
/// mu vanishes on the path.
DeficiencyTrace deficiency_trace(const Environment& reference, const Environment& mu, const Word& omega,
                                 std::size_t n, mpfr_prec_t precision = kDefaultPrecision,
                                 std::optional<Rational> ceiling = std::nullopt);

struct AlphaStep {
  std::size_t n = 0;
  /// M(alpha_{<n} 0), compared with 2^-n.
  Rational zero_branch;
  Symbol symbol = 0;
  /// M(alpha_{1:n}); never above 2^-n for a semimeasure M.
  Rational prefix_mass;
  bool bound_holds = true;
};

struct AlphaSequence {
  Word alpha;
  std::vector<AlphaStep> steps;
  bool bound_holds = true;

  /// Per-step comparison values.
  nlohmann::json sidecar() const;
};

/// alpha_n = 0 iff M(alpha_{<n} 0) <= 2^-n. Binary alphabets only.
AlphaSequence leftmost_random(const Environment& m, std::size_t n);

/// Functional enumerated by stages F_n(omega_{1:n}) with tolerances eps_n.
class EnumerableFunctional {
 public:
  virtual ~EnumerableFunctional() = default;
  virtual std::string name() const = 0;
  /// F_n(x) with n = length of x.
  virtual Rational value(const Word& x) const = 0;
  /// eps_n
  virtual Rational tolerance(std::size_t n) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

using FunctionalPtr = std::shared_ptr<const EnumerableFunctional>;

/// F_n = eps_n = eps.
FunctionalPtr make_constant_functional(const Rational& eps);
/// F_n = 0, eps_n = eps.
FunctionalPtr make_zero_functional(const Rational& eps);
/// F_n(x) = 2^n eps [x = 0^n], eps_n = eps. E over the uniform measure is eps.
FunctionalPtr make_indicator_functional(const Rational& eps);
/// F_n(x) = eps r with r the length of the leading zero run of x;
/// nondecreasing in n, and E over the uniform measure is eps (1 - 2^-n).
FunctionalPtr make_zero_run_functional(const Rational& eps);

/// E_mu[F_n] by exact enumeration.
Rational functional_expectation(const Environment& mu, const EnumerableFunctional& f, std::size_t n);

/// First (n, x) with F_n(x_{1:n}) > F_{n+1}(x), searching all strings of
/// length <= depth; nullopt when F is nondecreasing there.
std::optional<Word> monotonicity_defect(const EnumerableFunctional& f, std::size_t alphabet, std::size_t depth);

/// mu-bar_n(x_{1:k}) = eps_n^-1 sum_{omega_{k+1:n}} mu(omega_{1:n}) F_n(omega_{1:n})
/// for k <= n, 0 beyond. Throws hypothesis_failed unless E_mu[F_n] <= eps_n.
EnvPtr e2i_build_mubar(const Environment& mu, const EnumerableFunctional& f, std::size_t n);

struct IndividualBound {
  /// F_n(omega) <= eps_n / w * M(omega_{1:n}) / mu(omega_{1:n})
  Verdict at_n;
  /// F_n(omega) <= eps_n / w * 2^d(omega), d over prefixes up to n
  Verdict with_deficiency;
  Rational weight;
};

/// `mubar_index` names the mu-bar_n component of `extended`.
IndividualBound e2i_individual_bound(const MixtureEnv& extended, std::size_t mubar_index,
                                     const EnumerableFunctional& f, const Environment& mu, const Word& omega,
                                     std::size_t n);

struct Prop8Report {
  std::size_t k0 = 0;
  std::vector<Interval> sum_h_mu;  // cumulative, t = 1..n
  std::vector<Interval> sum_h_d;
  DeficiencyTrace deficiency;
};

/// Hellinger sums of delta-hat_{k0} against mu = nu_{k0} and against D-hat
/// along omega, with the deficiency of omega relative to the raw mixture.
Prop8Report prop8_trace(const ClassPtr& cls, const WeightScheme& weights, std::size_t k0, const Word& omega,
                        std::size_t n, mpfr_prec_t precision = kDefaultPrecision);

/// E_mu[exp(1/2 sum_{t<=n} h_t(delta-hat_{k0}, mu))] <= eps_{k0}^{-1/2}.
Verdict prop8_expected_bound(const ClassPtr& cls, const WeightScheme& weights, std::size_t k0, std::size_t n,
                             mpfr_prec_t start = kDefaultPrecision);

struct RatioBoundReport {
  std::size_t checked = 0;
  bool holds = true;
  std::optional<std::pair<std::size_t, Word>> violation;
  /// max over k, x of the ratio divided by its bound.
  Rational worst;
};

/// delta-hat_{k-1}(x) / delta-hat_k(x) <= 1 + eps_k / eps_O for every k with
/// a measure below it and every x of length <= depth.
RatioBoundReport ratio_bound_check(const ClassPtr& cls, const WeightScheme& weights, std::size_t depth);

/// delta-hat_k: normalized measures-only mixture over indices <= k.
MixturePtr delta_hat(const ClassPtr& cls, const WeightScheme& weights, std::size_t k);

}  // namespace semilab
