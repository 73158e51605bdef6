#include "semilab/mixtures.hpp"

#include "semilab/error.hpp"

#include <algorithm>

namespace semilab {

using nlohmann::json;

WeightScheme WeightScheme::standard(std::size_t count) {
  if (count == 0) throw Error(ErrorCode::invalid_argument, "weight count must be at least 1");
  WeightScheme w;
  w.default_ = true;
  w.weights_.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    Integer i6;
    mpz_ui_pow_ui(i6.get_mpz_t(), i, 6);
    Rational e(1, i6);
    w.weights_.push_back(e * pow2(-static_cast<long>(i)));
  }
  return w;
}

WeightScheme WeightScheme::explicit_weights(std::vector<Rational> weights) {
  if (weights.empty()) throw Error(ErrorCode::validation, "empty weight list");
  WeightScheme w;
  Rational total = 0;
  for (const auto& e : weights) {
    if (e <= 0) throw Error(ErrorCode::validation, "mixture weight " + to_string(e) + " is not positive");
    total += e;
  }
  if (total > 1) throw Error(ErrorCode::validation, "mixture weights sum to " + to_string(total) + " > 1");
  w.weights_ = std::move(weights);
  return w;
}

Rational WeightScheme::total() const {
  Rational s = 0;
  for (const auto& e : weights_) s += e;
  return s;
}

EnvClass::EnvClass(std::vector<EnvPtr> members, std::size_t cert_depth)
    : members_(std::move(members)), cert_depth_(cert_depth) {
  if (members_.empty()) throw Error(ErrorCode::validation, "environment class is empty");
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const auto& env = members_[i];
    if (env->alphabet() != members_.front()->alphabet()) {
      throw Error(ErrorCode::validation, "class member " + std::to_string(i + 1) + " has a different alphabet");
    }
    std::size_t depth = default_cert_depth(env->alphabet(), cert_depth);
    if (auto limit = env->depth_limit()) depth = std::min(depth, *limit);
    const auto report = validate(*env, depth);
    if (!report.is_semimeasure) {
      throw Error(ErrorCode::validation, "class member " + std::to_string(i + 1) + " is not a semimeasure at '" +
                                             report.first_defect_node->str() + "': " + report.defect);
    }
    if (env->declared_class() == MassClass::measure && !report.is_measure_to_depth) {
      throw Error(ErrorCode::validation,
                  "class member " + std::to_string(i + 1) + " is declared a measure but fails at '" +
                      report.first_measure_defect->str() + "'");
    }
    measure_.push_back(report.is_measure_to_depth);
  }
}

std::optional<std::size_t> EnvClass::first_measure() const {
  for (std::size_t i = 1; i <= size(); ++i) {
    if (is_measure(i)) return i;
  }
  return std::nullopt;
}

QuasimeasureEnv::QuasimeasureEnv(EnvPtr base, std::size_t depth_cap)
    : Environment(base->alphabet()), base_(std::move(base)), depth_cap_(depth_cap) {}

json QuasimeasureEnv::to_json() const {
  return {{"kind", "derived"}, {"op", "quasimeasure"}, {"depth_cap", depth_cap_}, {"base", base_->to_json()}};
}

void QuasimeasureEnv::advance(std::size_t n) const {
  if (n > depth_cap_) {
    throw Error(ErrorCode::depth_exceeded, "quasimeasure queried at length " + std::to_string(n) +
                                               " beyond cap " + std::to_string(depth_cap_));
  }
  std::lock_guard lock(mutex_);
  while (masses_.size() < n) {
    const std::size_t len = masses_.size() + 1;
    masses_.push_back(base_->total_mass(len));
    if (!cutoff_ && masses_.back() <= 1 - Rational(1, len)) cutoff_ = len;
  }
}

bool QuasimeasureEnv::alive(std::size_t n) const {
  if (n == 0) return true;
  advance(n);
  std::lock_guard lock(mutex_);
  return !cutoff_ || *cutoff_ > n;
}

std::optional<std::size_t> QuasimeasureEnv::cutoff(std::size_t n) const {
  advance(std::min(n, depth_cap_));
  std::lock_guard lock(mutex_);
  if (cutoff_ && *cutoff_ <= n) return cutoff_;
  return std::nullopt;
}

Rational QuasimeasureEnv::base_mass(std::size_t n) const {
  if (n == 0) return base_->eval(std::span<const Symbol>{});
  advance(n);
  std::lock_guard lock(mutex_);
  return masses_[n - 1];
}

Rational QuasimeasureEnv::evaluate(std::span<const Symbol> x) const {
  if (!alive(x.size())) return 0;
  return base_->eval(x);
}

std::optional<Rational> QuasimeasureEnv::closed_form_mass(std::size_t n) const {
  if (!alive(n)) return Rational(0);
  return base_mass(n);
}

EnvPtr quasimeasure_transform(EnvPtr env, std::size_t depth_cap) {
  return std::make_shared<QuasimeasureEnv>(std::move(env), depth_cap);
}

const char* to_string(MixtureMode m) noexcept {
  switch (m) {
    case MixtureMode::raw: return "raw";
    case MixtureMode::quasi: return "quasi";
    case MixtureMode::measures_only: return "measures-only";
    case MixtureMode::normalized_measures_only: return "normalized-measures-only";
  }
  return "raw";
}

MixtureMode parse_mixture_mode(std::string_view text) {
  for (auto m : {MixtureMode::raw, MixtureMode::quasi, MixtureMode::measures_only,
                 MixtureMode::normalized_measures_only}) {
    if (text == to_string(m)) return m;
  }
  throw Error(ErrorCode::parse, "unknown mixture mode '" + std::string(text) + "'");
}

MixtureEnv::MixtureEnv(ClassPtr cls, WeightScheme weights, MixtureMode mode, std::optional<std::size_t> k,
                       std::size_t quasi_depth_cap)
    : Environment(cls->alphabet()),
      class_(std::move(cls)),
      weights_(std::move(weights)),
      mode_(mode),
      k_(k.value_or(class_->size())),
      quasi_depth_cap_(quasi_depth_cap) {
  if (weights_.size() < class_->size()) {
    throw Error(ErrorCode::validation, "class of size " + std::to_string(class_->size()) + " has only " +
                                           std::to_string(weights_.size()) + " weights");
  }
  if (k_ == 0 || k_ > class_->size()) throw Error(ErrorCode::invalid_argument, "mixture bound k out of range");
  for (std::size_t i = 1; i <= class_->size(); ++i) {
    const auto& env = (*class_)[i];
    const bool plain = mode_ != MixtureMode::quasi ||
                       (class_->is_measure(i) && env->declared_class() == MassClass::measure);
    components_.push_back(plain ? env : quasimeasure_transform(env, quasi_depth_cap_));
  }
  select_members();
}

MixtureEnv::MixtureEnv(const MixtureEnv& other, std::size_t k, MixtureMode mode)
    : Environment(other.alphabet()),
      class_(other.class_),
      weights_(other.weights_),
      mode_(mode),
      k_(k),
      quasi_depth_cap_(other.quasi_depth_cap_),
      components_(other.components_) {
  if ((mode == MixtureMode::quasi) != (other.mode_ == MixtureMode::quasi)) {
    components_.clear();
    for (std::size_t i = 1; i <= class_->size(); ++i) {
      const auto& env = (*class_)[i];
      const bool plain = mode_ != MixtureMode::quasi ||
                         (class_->is_measure(i) && env->declared_class() == MassClass::measure);
      components_.push_back(plain ? env : quasimeasure_transform(env, quasi_depth_cap_));
    }
  }
  select_members();
}

void MixtureEnv::select_members() {
  const bool measures = mode_ == MixtureMode::measures_only || mode_ == MixtureMode::normalized_measures_only;
  for (std::size_t i = 1; i <= k_; ++i) {
    if (!measures || class_->is_measure(i)) members_.push_back(i);
  }
  if (mode_ == MixtureMode::normalized_measures_only) {
    root_norm_ = raw_sum({});
    if (root_norm_ == 0) throw Error(ErrorCode::normalization, "measures-only mixture has zero total mass");
  }
}

std::vector<std::size_t> MixtureEnv::measure_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i <= k_; ++i) {
    if (class_->is_measure(i)) out.push_back(i);
  }
  return out;
}

MassClass MixtureEnv::declared_class() const {
  if (mode_ == MixtureMode::normalized_measures_only) return MassClass::measure;
  Rational total = 0;
  for (std::size_t i : members_) {
    if (!class_->is_measure(i)) return MassClass::semimeasure;
    total += weights_(i);
  }
  return total == 1 ? MassClass::measure : MassClass::semimeasure;
}

bool MixtureEnv::zero_absorbing() const {
  return std::all_of(members_.begin(), members_.end(), [&](std::size_t i) { return component(i)->zero_absorbing(); });
}

std::optional<std::size_t> MixtureEnv::depth_limit() const {
  std::optional<std::size_t> limit;
  for (std::size_t i : members_) {
    if (auto d = component(i)->depth_limit()) limit = limit ? std::min(*limit, *d) : *d;
  }
  return limit;
}

json MixtureEnv::to_json() const {
  json members = json::array();
  for (std::size_t i = 1; i <= class_->size(); ++i) {
    if (weights_.is_default()) {
      members.push_back((*class_)[i]->to_json());
    } else {
      members.push_back({{"env", (*class_)[i]->to_json()}, {"weight", to_string(weights_(i))}});
    }
  }
  json out = {{"kind", "derived"},
              {"op", "mixture"},
              {"mode", to_string(mode_)},
              {"cert_depth", class_->cert_depth()},
              {"class", members}};
  if (k_ != class_->size()) out["k"] = k_;
  if (mode_ == MixtureMode::quasi) out["depth_cap"] = quasi_depth_cap_;
  return out;
}

Rational MixtureEnv::raw_sum(std::span<const Symbol> x) const {
  Rational s = 0;
  for (std::size_t i : members_) {
    Rational v = component(i)->eval(x);
    if (v != 0) s += weights_(i) * v;
  }
  return s;
}

Rational MixtureEnv::evaluate(std::span<const Symbol> x) const {
  Rational s = raw_sum(x);
  if (mode_ == MixtureMode::normalized_measures_only) s /= root_norm_;
  return s;
}

std::optional<Rational> MixtureEnv::closed_form_mass(std::size_t n) const {
  Rational s = 0;
  for (std::size_t i : members_) s += weights_(i) * component(i)->total_mass(n);
  if (mode_ == MixtureMode::normalized_measures_only) s /= root_norm_;
  return s;
}

std::shared_ptr<const MixtureEnv> MixtureEnv::truncated(std::size_t t) const {
  if (t == 0) throw Error(ErrorCode::invalid_argument, "stage index must be at least 1");
  return std::shared_ptr<const MixtureEnv>(new MixtureEnv(*this, std::min(t, k_), mode_));
}

std::shared_ptr<const MixtureEnv> MixtureEnv::with_mode(MixtureMode mode) const {
  return std::shared_ptr<const MixtureEnv>(new MixtureEnv(*this, k_, mode));
}

EnvPtr normalize(const EnvPtr& env, std::size_t depth, bool allow_quasi) {
  if (const auto* mix = dynamic_cast<const MixtureEnv*>(env.get())) {
    switch (mix->mode()) {
      case MixtureMode::normalized_measures_only:
        return env;
      case MixtureMode::measures_only:
        return mix->with_mode(MixtureMode::normalized_measures_only);
      case MixtureMode::quasi:
        if (!allow_quasi) {
          for (std::size_t i : mix->members()) {
            if (mix->env_class().is_measure(i)) continue;
            const auto& q = static_cast<const QuasimeasureEnv&>(*mix->component(i));
            if (q.alive(std::min(depth, q.depth_cap()))) {
              throw Error(ErrorCode::approximable_not_measure,
                          "quasi-mode component " + std::to_string(i) + " is a live strict quasimeasure at depth " +
                              std::to_string(depth) + "; its normalization is only approximable");
            }
          }
        }
        break;
      case MixtureMode::raw:
        break;
    }
  }
  const Rational root = env->eval(std::span<const Symbol>{});
  if (root == 0) throw Error(ErrorCode::normalization, "cannot normalize an environment with zero total mass");
  if (root == 1) return env;
  return make_normalized(env);
}

Rational dominance_constant(const MixtureEnv& mix, std::size_t index) {
  const auto& members = mix.members();
  if (!std::binary_search(members.begin(), members.end(), index)) {
    throw Error(ErrorCode::not_dominated, "component " + std::to_string(index) + " is excluded by " +
                                              to_string(mix.mode()) + " mode");
  }
  return mix.weights()(index);
}

std::optional<std::size_t> k_x(const MixtureEnv& mix, const Word& x) {
  if (mix.mode() != MixtureMode::quasi) throw Error(ErrorCode::invalid_argument, "k_x needs a quasi-mode mixture");
  for (std::size_t i : mix.members()) {
    if (mix.env_class().is_measure(i)) continue;
    if (mix.component(i)->eval(x) != 0) return i;
  }
  return std::nullopt;
}

const char* to_string(StageRule r) noexcept { return r == StageRule::exact ? "exact" : "partial-sum"; }

EnvPtr StageApproximation::stage(std::size_t t) const {
  if (t == 0) throw Error(ErrorCode::invalid_argument, "stage index must be at least 1");
  if (rule == StageRule::exact) return target;
  return target->truncated(t);
}

Rational stage_eval(const StageApproximation& stages, std::size_t t, const Word& x) { return stages.stage(t)->eval(x); }

}  // namespace semilab
