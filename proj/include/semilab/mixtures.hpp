#pragma once

#include "semilab/envcore.hpp"
#include "semilab/environment.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace semilab {

/// Mixture weights, indexed from 1.
class WeightScheme {
 public:
  /// i^-6 2^-i for i = 1..count.
  static WeightScheme standard(std::size_t count);
  /// Requires every weight > 0 and a total of at most 1.
  static WeightScheme explicit_weights(std::vector<Rational> weights);

  bool is_default() const noexcept { return default_; }
  std::size_t size() const noexcept { return weights_.size(); }
  const Rational& operator()(std::size_t i) const { return weights_.at(i - 1); }
  const std::vector<Rational>& values() const noexcept { return weights_; }
  Rational total() const;

 private:
  std::vector<Rational> weights_;
  bool default_ = false;
};

inline WeightScheme default_weights(std::size_t count) { return WeightScheme::standard(count); }

/// Ordered class nu_1..nu_m. Membership in the measure set is decided by exact
/// validation to `cert_depth`; a declared measure that fails is rejected.
class EnvClass {
 public:
  EnvClass(std::vector<EnvPtr> members, std::size_t cert_depth);

  std::size_t size() const noexcept { return members_.size(); }
  std::size_t alphabet() const noexcept { return members_.front()->alphabet(); }
  std::size_t cert_depth() const noexcept { return cert_depth_; }
  const EnvPtr& operator[](std::size_t i) const { return members_.at(i - 1); }
  bool is_measure(std::size_t i) const { return measure_.at(i - 1); }
  /// Smallest measure index, if any.
  std::optional<std::size_t> first_measure() const;

 private:
  std::vector<EnvPtr> members_;
  std::vector<bool> measure_;
  std::size_t cert_depth_;
};

using ClassPtr = std::shared_ptr<const EnvClass>;

/// nu~: keeps nu on length-n strings only while the length-n total mass
/// exceeds 1 - 1/n; once the condition fails it stays failed.
class QuasimeasureEnv final : public Environment {
 public:
  QuasimeasureEnv(EnvPtr base, std::size_t depth_cap);

  std::string kind() const override { return "derived"; }
  MassClass declared_class() const override { return base_->declared_class(); }
  bool zero_absorbing() const override { return base_->zero_absorbing(); }
  std::optional<std::size_t> depth_limit() const override { return depth_cap_; }
  nlohmann::json to_json() const override;

  const EnvPtr& base() const noexcept { return base_; }
  std::size_t depth_cap() const noexcept { return depth_cap_; }
  /// True when the condition holds at every length 1..n.
  bool alive(std::size_t n) const;
  /// First length at which the condition fails, searching up to `n`.
  std::optional<std::size_t> cutoff(std::size_t n) const;
  /// Total base mass at length n (cached).
  Rational base_mass(std::size_t n) const;

 protected:
  Rational evaluate(std::span<const Symbol> x) const override;
  std::optional<Rational> closed_form_mass(std::size_t n) const override;

 private:
  void advance(std::size_t n) const;

  EnvPtr base_;
  std::size_t depth_cap_;
  mutable std::mutex mutex_;
  mutable std::vector<Rational> masses_;  // masses_[n-1] = T_n
  mutable std::optional<std::size_t> cutoff_;
};

inline constexpr std::size_t kDefaultQuasiDepthCap = 64;

EnvPtr quasimeasure_transform(EnvPtr env, std::size_t depth_cap = kDefaultQuasiDepthCap);

enum class MixtureMode { raw, quasi, measures_only, normalized_measures_only };

const char* to_string(MixtureMode m) noexcept;
MixtureMode parse_mixture_mode(std::string_view text);

/// Weighted sum over components 1..k of a class. In measures-only modes only
/// indices certified as measures contribute; quasi mode sums the
/// quasimeasure transforms.
class MixtureEnv final : public Environment {
 public:
  MixtureEnv(ClassPtr cls, WeightScheme weights, MixtureMode mode, std::optional<std::size_t> k = std::nullopt,
             std::size_t quasi_depth_cap = kDefaultQuasiDepthCap);

  std::string kind() const override { return "derived"; }
  MassClass declared_class() const override;
  bool zero_absorbing() const override;
  std::optional<std::size_t> depth_limit() const override;
  nlohmann::json to_json() const override;

  const EnvClass& env_class() const noexcept { return *class_; }
  const ClassPtr& class_ptr() const noexcept { return class_; }
  const WeightScheme& weights() const noexcept { return weights_; }
  MixtureMode mode() const noexcept { return mode_; }
  std::size_t bound() const noexcept { return k_; }
  /// Indices that contribute, in order.
  const std::vector<std::size_t>& members() const noexcept { return members_; }
  /// Measure indices <= bound (J_k).
  std::vector<std::size_t> measure_indices() const;
  /// The environment summed at index i (the transform in quasi mode).
  const EnvPtr& component(std::size_t i) const { return components_.at(i - 1); }

  /// Same mixture restricted to indices <= t.
  std::shared_ptr<const MixtureEnv> truncated(std::size_t t) const;
  /// Same class, weights and bound in another mode.
  std::shared_ptr<const MixtureEnv> with_mode(MixtureMode mode) const;

 protected:
  Rational evaluate(std::span<const Symbol> x) const override;
  std::optional<Rational> closed_form_mass(std::size_t n) const override;

 private:
  MixtureEnv(const MixtureEnv& other, std::size_t k, MixtureMode mode);
  void select_members();
  Rational raw_sum(std::span<const Symbol> x) const;

  ClassPtr class_;
  WeightScheme weights_;
  MixtureMode mode_;
  std::size_t k_;
  std::size_t quasi_depth_cap_;
  std::vector<EnvPtr> components_;
  std::vector<std::size_t> members_;
  Rational root_norm_ = 1;
};

using MixturePtr = std::shared_ptr<const MixtureEnv>;

/// D-hat from a measures-only mixture; the identity for environments with
/// total mass 1; x -> env(x)/env(epsilon) otherwise. A quasi-mode mixture with
/// a live strict quasimeasure component at `depth` is refused unless
/// allow_quasi is set.
EnvPtr normalize(const EnvPtr& env, std::size_t depth, bool allow_quasi = false);

/// epsilon_i, when mix dominates component i with that constant.
Rational dominance_constant(const MixtureEnv& mix, std::size_t index);

/// Smallest non-measure index whose quasimeasure is nonzero at x.
std::optional<std::size_t> k_x(const MixtureEnv& mix, const Word& x);

enum class StageRule { exact, partial_sum };

const char* to_string(StageRule r) noexcept;

/// Lower approximations M^t of a mixture.
struct StageApproximation {
  MixturePtr target;
  StageRule rule = StageRule::exact;

  EnvPtr stage(std::size_t t) const;
};

Rational stage_eval(const StageApproximation& stages, std::size_t t, const Word& x);

}  // namespace semilab
