#pragma once

#include "semilab/mixtures.hpp"
#include "semilab/randomness.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace semilab {

/// alpha^t: the leftmost-random construction of length t against stage t.
Word alpha_stage(const StageApproximation& stages, std::size_t t);

/// nu^t(x) = 2^-t #{y : l(y) = t, x prefix of y, y < alpha^t}. Binary.
class NuStageEnv final : public Environment {
 public:
  explicit NuStageEnv(Word alpha);

  std::string kind() const override { return "derived"; }
  MassClass declared_class() const override { return MassClass::semimeasure; }
  bool zero_absorbing() const override { return true; }
  nlohmann::json to_json() const override;

  const Word& alpha() const noexcept { return alpha_; }

 protected:
  Rational evaluate(std::span<const Symbol> x) const override;

 private:
  Word alpha_;
};

/// lim_t nu^t for an eventually periodic alpha = prefix cycle cycle ...
/// Off the alpha spine the value is 2^-l(x) or 0; on the spine it is the
/// binary fraction of the remaining alpha digits, an exact rational.
class NuLimitEnv final : public Environment {
 public:
  NuLimitEnv(Word prefix, Word cycle, std::size_t depth);

  std::string kind() const override { return "derived"; }
  MassClass declared_class() const override { return MassClass::semimeasure; }
  bool zero_absorbing() const override { return true; }
  std::optional<std::size_t> depth_limit() const override { return depth_; }
  nlohmann::json to_json() const override;

  Symbol alpha(std::size_t i) const;
  /// sum_{j > l} alpha_j 2^-j
  Rational spine_value(std::size_t l) const;

 protected:
  Rational evaluate(std::span<const Symbol> x) const override;

 private:
  Word prefix_;
  Word cycle_;
  std::size_t depth_;
};

struct NuLimit {
  std::shared_ptr<const NuLimitEnv> env;
  Word alpha;
  /// Smallest t from which every alpha^t agrees with alpha.
  std::size_t stabilization_stage = 0;
  std::size_t period_start = 0;
  std::size_t period = 0;
};

/// Builds alpha to t_max, reads the limit as an eventually periodic sequence
/// whose cycle covers the last `margin` symbols, and evaluates nu exactly to
/// depth t_max - margin. Throws needs_larger_tmax when no such reading exists
/// or the stages settle too late.
NuLimit nu_limit(const StageApproximation& stages, std::size_t t_max, std::size_t margin = 16);

struct ContaminatedMixture {
  Rational gamma;
  EnvPtr nu;
  MixturePtr mixture;
  EnvPtr composite;
};

/// M'(x) = (1-gamma) nu(x) + gamma M(x), 0 < gamma < 1/5.
ContaminatedMixture build_mprime(EnvPtr nu, MixturePtr mixture, const Rational& gamma);

/// First (index, x) where M'(x) < gamma eps_i nu_i(x) up to `depth`.
std::optional<std::pair<std::size_t, Word>> universality_defect(const ContaminatedMixture& cm, std::size_t depth);

struct GapPosition {
  std::size_t n = 0;
  Rational nu_before;  // nu(alpha_{<n})
  Rational nu_at;      // nu(alpha_{1:n})
  Rational posterior;  // M'(alpha_n | alpha_{<n})
  Rational bound;      // (1-gamma)/(1+3gamma)
  bool nu_equal = false;
  bool nu_lower = false;
  bool posterior_bound = false;
  bool certified = false;
};

struct NonconvergenceReport {
  Rational gamma;
  Word alpha;
  std::vector<GapPosition> positions;
  std::size_t horizon = 0;

  bool all_certified() const;
  nlohmann::json to_json(const nlohmann::json& class_spec) const;
};

/// Checks every n <= horizon with alpha_n alpha_{n+1} = 01, alpha built from
/// cm.mixture. Throws inconclusive_configuration when there is none.
NonconvergenceReport verify_nonconvergence(const ContaminatedMixture& cm, std::size_t horizon);

}  // namespace semilab
