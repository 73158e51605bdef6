#include "semilab/counterexample.hpp"

#include "semilab/error.hpp"

#include <algorithm>

namespace semilab {

using nlohmann::json;

Word alpha_stage(const StageApproximation& stages, std::size_t t) {
  if (t == 0) return Word(2);
  return leftmost_random(*stages.stage(t), t).alpha;
}

namespace {

void require_binary(std::size_t alphabet) {
  if (alphabet != 2) throw Error(ErrorCode::invalid_argument, "the counterexample construction is binary");
}

/// sum_i bits[i] 2^-(i+1)
Rational binary_fraction(std::span<const Symbol> bits) {
  Integer v = 0;
  for (Symbol b : bits) v = 2 * v + b;
  return Rational(v) * pow2(-static_cast<long>(bits.size()));
}

}  // namespace

NuStageEnv::NuStageEnv(Word alpha) : Environment(alpha.alphabet()), alpha_(std::move(alpha)) {
  require_binary(alphabet());
}

json NuStageEnv::to_json() const { return {{"kind", "derived"}, {"op", "nu_stage"}, {"alpha", alpha_.str()}}; }

Rational NuStageEnv::evaluate(std::span<const Symbol> x) const {
  const std::size_t t = alpha_.size();
  if (x.size() > t) return 0;
  const auto spine = alpha_.symbols().first(x.size());
  const auto cmp = std::lexicographical_compare_three_way(x.begin(), x.end(), spine.begin(), spine.end());
  if (cmp < 0) return pow2(-static_cast<long>(x.size()));
  if (cmp > 0) return 0;
  // 2^-t times the binary value of alpha_{l+1:t}.
  return binary_fraction(alpha_.symbols().subspan(x.size())) * pow2(-static_cast<long>(x.size()));
}

NuLimitEnv::NuLimitEnv(Word prefix, Word cycle, std::size_t depth)
    : Environment(prefix.alphabet()), prefix_(std::move(prefix)), cycle_(std::move(cycle)), depth_(depth) {
  require_binary(alphabet());
  if (cycle_.empty()) throw Error(ErrorCode::invalid_argument, "limit sequence needs a nonempty cycle");
}

json NuLimitEnv::to_json() const {
  return {{"kind", "derived"},
          {"op", "nu_limit"},
          {"prefix", prefix_.str()},
          {"cycle", cycle_.str()},
          {"depth", depth_}};
}

Symbol NuLimitEnv::alpha(std::size_t i) const {
  return i < prefix_.size() ? prefix_[i] : cycle_[(i - prefix_.size()) % cycle_.size()];
}

Rational NuLimitEnv::spine_value(std::size_t l) const {
  // Digits after position l: a finite head, then the cycle repeated forever.
  std::vector<Symbol> head;
  std::size_t i = l;
  for (; i < prefix_.size(); ++i) head.push_back(prefix_[i]);
  const std::size_t offset = (i - prefix_.size()) % cycle_.size();
  std::vector<Symbol> rotated;
  for (std::size_t j = 0; j < cycle_.size(); ++j) rotated.push_back(cycle_[(offset + j) % cycle_.size()]);
  Integer cycle_value = 0;
  for (Symbol b : rotated) cycle_value = 2 * cycle_value + b;
  Integer period_den = (Integer(1) << static_cast<mp_bitcnt_t>(rotated.size())) - 1;
  Rational tail(cycle_value, period_den);
  tail.canonicalize();
  const long head_len = static_cast<long>(head.size());
  const Rational frac = binary_fraction(head) + tail * pow2(-head_len);
  return frac * pow2(-static_cast<long>(l));
}

Rational NuLimitEnv::evaluate(std::span<const Symbol> x) const {
  if (x.size() > depth_) {
    throw Error(ErrorCode::depth_exceeded, "limit semimeasure evaluated only to depth " + std::to_string(depth_));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Symbol a = alpha(i);
    if (x[i] < a) return pow2(-static_cast<long>(x.size()));
    if (x[i] > a) return 0;
  }
  return spine_value(x.size());
}

NuLimit nu_limit(const StageApproximation& stages, std::size_t t_max, std::size_t margin) {
  require_binary(stages.target->alphabet());
  if (margin < 2 || t_max <= margin) throw Error(ErrorCode::invalid_argument, "need t_max > margin >= 2");
  NuLimit out;
  out.alpha = leftmost_random(*stages.target, t_max).alpha;

  out.stabilization_stage = 1;
  for (std::size_t t = t_max; t >= 1; --t) {
    if (alpha_stage(stages, t) != out.alpha.prefix(t)) {
      out.stabilization_stage = t + 1;
      break;
    }
  }
  const std::size_t depth = t_max - margin;
  if (out.stabilization_stage > depth) {
    throw Error(ErrorCode::needs_larger_tmax, "stages settle only at t = " + std::to_string(out.stabilization_stage));
  }

  const auto& a = out.alpha;
  for (std::size_t q = 1; q <= margin / 2 && out.period == 0; ++q) {
    for (std::size_t p = 0; p <= depth; ++p) {
      bool periodic = true;
      for (std::size_t i = p; i + q < t_max && periodic; ++i) periodic = a[i] == a[i + q];
      if (periodic) {
        out.period_start = p;
        out.period = q;
        break;
      }
    }
  }
  if (out.period == 0) {
    throw Error(ErrorCode::needs_larger_tmax,
                "alpha shows no cycle over its last " + std::to_string(margin) + " symbols up to t_max");
  }
  Word cycle(2);
  for (std::size_t i = 0; i < out.period; ++i) cycle.push_back(a[out.period_start + i]);
  out.env = std::make_shared<NuLimitEnv>(a.prefix(out.period_start), std::move(cycle), depth);
  return out;
}

namespace {

class ContaminatedEnv final : public Environment {
 public:
  ContaminatedEnv(EnvPtr nu, MixturePtr mixture, Rational gamma)
      : Environment(nu->alphabet()), nu_(std::move(nu)), mixture_(std::move(mixture)), gamma_(std::move(gamma)) {}

  std::string kind() const override { return "derived"; }
  MassClass declared_class() const override { return MassClass::semimeasure; }
  bool zero_absorbing() const override { return nu_->zero_absorbing() && mixture_->zero_absorbing(); }
  std::optional<std::size_t> depth_limit() const override {
    auto a = nu_->depth_limit();
    auto b = mixture_->depth_limit();
    if (a && b) return std::min(*a, *b);
    return a ? a : b;
  }
  json to_json() const override {
    return {{"kind", "derived"},
            {"op", "contaminated"},
            {"gamma", to_string(gamma_)},
            {"nu", nu_->to_json()},
            {"mixture", mixture_->to_json()}};
  }

 protected:
  Rational evaluate(std::span<const Symbol> x) const override {
    return (1 - gamma_) * nu_->eval(x) + gamma_ * mixture_->eval(x);
  }

 private:
  EnvPtr nu_;
  MixturePtr mixture_;
  Rational gamma_;
};

}  // namespace

ContaminatedMixture build_mprime(EnvPtr nu, MixturePtr mixture, const Rational& gamma) {
  if (gamma <= 0 || gamma >= Rational(1, 5)) {
    throw Error(ErrorCode::invalid_argument, "gamma " + to_string(gamma) + " outside (0, 1/5)");
  }
  if (nu->alphabet() != mixture->alphabet()) throw Error(ErrorCode::invalid_argument, "alphabet mismatch");
  auto composite = std::make_shared<ContaminatedEnv>(nu, mixture, gamma);
  return {gamma, std::move(nu), std::move(mixture), std::move(composite)};
}

std::optional<std::pair<std::size_t, Word>> universality_defect(const ContaminatedMixture& cm, std::size_t depth) {
  const auto& cls = cm.mixture->env_class();
  std::optional<std::pair<std::size_t, Word>> defect;
  Word x(cm.composite->alphabet());
  std::function<void()> walk = [&] {
    const Rational m = cm.composite->eval(x.symbols());
    for (std::size_t i : cm.mixture->members()) {
      if (m < cm.gamma * cm.mixture->weights()(i) * cls[i]->eval(x.symbols())) {
        defect = std::make_pair(i, x);
        return;
      }
    }
    if (x.size() == depth) return;
    for (Symbol a = 0; a < x.alphabet() && !defect; ++a) {
      x.push_back(a);
      walk();
      x.pop_back();
    }
  };
  walk();
  return defect;
}

bool NonconvergenceReport::all_certified() const {
  return !positions.empty() &&
         std::all_of(positions.begin(), positions.end(), [](const GapPosition& p) { return p.certified; });
}

json NonconvergenceReport::to_json(const json& class_spec) const {
  json pos = json::array();
  std::size_t certified = 0;
  for (const auto& p : positions) {
    certified += p.certified;
    pos.push_back({{"n", p.n},
                   {"nu_values", {{"before", to_string(p.nu_before)}, {"at", to_string(p.nu_at)}}},
                   {"mprime_posterior", to_string(p.posterior)},
                   {"gap", to_string(p.posterior - Rational(1, 2))},
                   {"bound", to_string(p.bound)},
                   {"checks", {{"nu_equal", p.nu_equal}, {"nu_lower", p.nu_lower}, {"posterior_bound", p.posterior_bound}}},
                   {"certified", p.certified}});
  }
  return {{"gamma", to_string(gamma)},
          {"class", class_spec},
          {"alpha", alpha.str()},
          {"horizon", horizon},
          {"positions", pos},
          {"counts", {{"positions", positions.size()}, {"certified", certified}}}};
}

NonconvergenceReport verify_nonconvergence(const ContaminatedMixture& cm, std::size_t horizon) {
  require_binary(cm.composite->alphabet());
  NonconvergenceReport report;
  report.gamma = cm.gamma;
  report.horizon = horizon;
  report.alpha = leftmost_random(*cm.mixture, horizon + 1).alpha;
  const Rational bound = (1 - cm.gamma) / (1 + 3 * cm.gamma);
  const auto& a = report.alpha;
  for (std::size_t n = 1; n <= horizon; ++n) {
    if (a[n - 1] != 0 || a[n] != 1) continue;
    GapPosition p;
    p.n = n;
    const auto before = a.symbols().first(n - 1);
    const auto at = a.symbols().first(n);
    p.nu_before = cm.nu->eval(before);
    p.nu_at = cm.nu->eval(at);
    p.posterior = cm.composite->eval(at) / cm.composite->eval(before);
    p.bound = bound;
    p.nu_equal = p.nu_before == p.nu_at;
    p.nu_lower = p.nu_at >= pow2(-static_cast<long>(n) - 1);
    p.posterior_bound = p.posterior >= bound && bound > Rational(1, 2);
    p.certified = p.nu_equal && p.nu_lower && p.posterior_bound;
    report.positions.push_back(std::move(p));
  }
  if (report.positions.empty()) {
    throw Error(ErrorCode::inconclusive_configuration,
                "no 01-position in alpha up to n = " + std::to_string(horizon) + "; the class is too poor");
  }
  return report;
}

}  // namespace semilab
