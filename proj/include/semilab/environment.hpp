#pragma once

#include "semilab/rational.hpp"
#include "semilab/word.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semilab {

enum class MassClass { measure, semimeasure };

const char* to_string(MassClass c) noexcept;

/// An evaluable semimeasure nu : X* -> [0,1] with exact rational values.
///
/// Environments are immutable once built and safe to share across threads.
/// Subclasses implement evaluate(); conditional() and closed_form_mass() are
/// optional fast paths.
class Environment {
 public:
  virtual ~Environment() = default;
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  std::size_t alphabet() const noexcept { return alphabet_; }

  /// nu(x). Checks that x is over this alphabet.
  Rational eval(const Word& x) const;
  Rational eval(std::span<const Symbol> x) const { return evaluate(x); }

  /// nu(xa)/nu(x). Precondition: nu(x) > 0 (not rechecked here).
  Rational conditional(std::span<const Symbol> x, Symbol a) const { return conditional_impl(x, a); }

  /// Sum of nu over all strings of length n.
  Rational total_mass(std::size_t n) const;

  virtual std::string kind() const = 0;
  virtual MassClass declared_class() const = 0;

  /// Largest length that can be evaluated, if bounded.
  virtual std::optional<std::size_t> depth_limit() const { return std::nullopt; }

  /// True when nu(x) = 0 forces nu(xy) = 0 by construction, which lets tree
  /// walks prune zero subtrees.
  virtual bool zero_absorbing() const { return false; }

  /// Spec-file form of this environment; derived environments carry
  /// {"kind":"derived", "op": ...}.
  virtual nlohmann::json to_json() const = 0;

 protected:
  explicit Environment(std::size_t alphabet);

  virtual Rational evaluate(std::span<const Symbol> x) const = 0;
  virtual Rational conditional_impl(std::span<const Symbol> x, Symbol a) const;
  virtual std::optional<Rational> closed_form_mass(std::size_t n) const;

 private:
  std::size_t alphabet_;
};

using EnvPtr = std::shared_ptr<const Environment>;

/// Environments given by per-step conditionals:
/// nu(x) = root_mass * prod_t step(x_{<t}, x_t).
class SequentialEnvironment : public Environment {
 public:
  bool zero_absorbing() const override { return true; }

 protected:
  using Environment::Environment;

  virtual Rational step(std::span<const Symbol> history, Symbol a) const = 0;
  virtual Rational root_mass() const { return 1; }
  /// Whether the step row sums to exactly one at every history.
  virtual bool steps_normalized() const = 0;

  Rational evaluate(std::span<const Symbol> x) const override;
  Rational conditional_impl(std::span<const Symbol> x, Symbol a) const override { return step(x, a); }
  std::optional<Rational> closed_form_mass(std::size_t n) const override;
};

enum class TailPolicy { error, zero };

EnvPtr make_uniform(std::size_t alphabet);
/// Binary i.i.d. with P(1) = p.
EnvPtr make_bernoulli(const Rational& p);
EnvPtr make_categorical(std::vector<Rational> probs);
/// Rows are indexed by the last `order` symbols; shorter histories are
/// left-padded with `start`.
EnvPtr make_markov(std::size_t alphabet, std::size_t order, std::map<Word, std::vector<Rational>> rows,
                   Symbol start = 0);
/// Point mass on the eventually periodic sequence prefix cycle cycle ...
EnvPtr make_deterministic(const Word& prefix, const Word& cycle);
/// nu(x) = (1-leak)^l(x) * base(x).
EnvPtr make_leaky(EnvPtr base, const Rational& leak);
/// Binary, mu(1 | x_{<t}) = t^-beta / 2.
EnvPtr make_decaying(unsigned beta);
EnvPtr make_table(std::size_t alphabet, std::size_t depth, std::map<Word, Rational> values,
                  TailPolicy tail = TailPolicy::error);
/// c * base(x).
EnvPtr make_scaled(EnvPtr base, const Rational& c);
/// base(x) / base(epsilon). Throws normalization when base(epsilon) = 0.
EnvPtr make_normalized(EnvPtr base);
/// Dense snapshot of `source` to `depth`, zero below. Serialises as a derived
/// table so that constructions without a closed spec form still round-trip.
EnvPtr materialize(const Environment& source, std::size_t depth, const std::string& origin);

}  // namespace semilab
