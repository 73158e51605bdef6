#include "semilab/randomness.hpp"

#include "semilab/envcore.hpp"
#include "semilab/error.hpp"

#include <map>

namespace semilab {

using nlohmann::json;

Rational default_deficiency_ceiling() { return pow2(64); }

namespace {

Interval log2_or_minus_inf(const Rational& q, mpfr_prec_t precision) {
  if (q > 0) return log2(Interval(q, precision));
  Interval r(precision);
  mpfr_set_inf(r.lo(), -1);
  mpfr_set_inf(r.hi(), -1);
  return r;
}

}  // namespace

DeficiencyTrace deficiency_trace(const Environment& reference, const Environment& mu, const Word& omega,
                                 std::size_t n, mpfr_prec_t precision, std::optional<Rational> ceiling) {
  if (omega.size() < n) throw Error(ErrorCode::invalid_argument, "sequence shorter than requested horizon");
  DeficiencyTrace trace;
  trace.ceiling = ceiling.value_or(default_deficiency_ceiling());
  trace.steps.reserve(n + 1);
  Rational sup;
  for (std::size_t k = 0; k <= n; ++k) {
    const auto prefix = omega.symbols().first(k);
    const Rational m = mu.eval(prefix);
    if (m == 0) throw Error(ErrorCode::undefined_posterior, "mu vanishes on '" + omega.prefix(k).str() + "'");
    DeficiencyStep step;
    step.n = k;
    step.ratio = reference.eval(prefix) / m;
    if (k == 0 || step.ratio > sup) sup = step.ratio;
    step.sup_ratio = sup;
    step.log2_ratio = log2_or_minus_inf(step.ratio, precision);
    step.sup_log2 = log2_or_minus_inf(sup, precision);
    if (step.ratio > trace.ceiling) trace.diverging = true;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

json AlphaSequence::sidecar() const {
  json steps_json = json::array();
  for (const auto& s : steps) {
    steps_json.push_back({{"n", s.n},
                          {"zero_branch", to_string(s.zero_branch)},
                          {"threshold", to_string(pow2(-static_cast<long>(s.n)))},
                          {"symbol", s.symbol},
                          {"prefix_mass", to_string(s.prefix_mass)},
                          {"bound_holds", s.bound_holds}});
  }
  return {{"alpha", alpha.str()}, {"bound_holds", bound_holds}, {"steps", steps_json}};
}

AlphaSequence leftmost_random(const Environment& m, std::size_t n) {
  if (m.alphabet() != 2) throw Error(ErrorCode::invalid_argument, "leftmost-random construction needs a binary alphabet");
  AlphaSequence out{Word(2), {}, true};
  out.steps.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const Rational threshold = pow2(-static_cast<long>(k));
    AlphaStep step;
    step.n = k;
    out.alpha.push_back(0);
    step.zero_branch = m.eval(out.alpha.symbols());
    if (step.zero_branch <= threshold) {
      step.prefix_mass = step.zero_branch;
    } else {
      out.alpha.pop_back();
      out.alpha.push_back(1);
      step.symbol = 1;
      step.prefix_mass = m.eval(out.alpha.symbols());
    }
    step.bound_holds = step.prefix_mass <= threshold;
    out.bound_holds = out.bound_holds && step.bound_holds;
    out.steps.push_back(std::move(step));
  }
  return out;
}

namespace {

class ConstantFunctional final : public EnumerableFunctional {
 public:
  ConstantFunctional(Rational eps, bool zero) : eps_(std::move(eps)), zero_(zero) {}
  std::string name() const override { return zero_ ? "zero" : "constant"; }
  Rational value(const Word&) const override { return zero_ ? Rational(0) : eps_; }
  Rational tolerance(std::size_t) const override { return eps_; }
  json to_json() const override { return {{"kind", name()}, {"eps", to_string(eps_)}}; }

 private:
  Rational eps_;
  bool zero_;
};

class IndicatorFunctional final : public EnumerableFunctional {
 public:
  explicit IndicatorFunctional(Rational eps) : eps_(std::move(eps)) {}
  std::string name() const override { return "indicator"; }
  Rational value(const Word& x) const override {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != 0) return 0;
    }
    return pow2(static_cast<long>(x.size())) * eps_;
  }
  Rational tolerance(std::size_t) const override { return eps_; }
  json to_json() const override { return {{"kind", name()}, {"eps", to_string(eps_)}}; }

 private:
  Rational eps_;
};

class ZeroRunFunctional final : public EnumerableFunctional {
 public:
  explicit ZeroRunFunctional(Rational eps) : eps_(std::move(eps)) {}
  std::string name() const override { return "zero-run"; }
  Rational value(const Word& x) const override {
    std::size_t r = 0;
    while (r < x.size() && x[r] == 0) ++r;
    return eps_ * static_cast<unsigned long>(r);
  }
  Rational tolerance(std::size_t) const override { return eps_; }
  json to_json() const override { return {{"kind", name()}, {"eps", to_string(eps_)}}; }

 private:
  Rational eps_;
};

void check_eps(const Rational& eps) {
  if (eps <= 0) throw Error(ErrorCode::invalid_argument, "functional tolerance must be positive");
}

}  // namespace

FunctionalPtr make_constant_functional(const Rational& eps) {
  check_eps(eps);
  return std::make_shared<ConstantFunctional>(eps, false);
}

FunctionalPtr make_zero_functional(const Rational& eps) {
  check_eps(eps);
  return std::make_shared<ConstantFunctional>(eps, true);
}

FunctionalPtr make_indicator_functional(const Rational& eps) {
  check_eps(eps);
  return std::make_shared<IndicatorFunctional>(eps);
}

FunctionalPtr make_zero_run_functional(const Rational& eps) {
  check_eps(eps);
  return std::make_shared<ZeroRunFunctional>(eps);
}

Rational functional_expectation(const Environment& mu, const EnumerableFunctional& f, std::size_t n) {
  Rational e = 0;
  for_each_support(mu, n, [&](const Word& x, const Rational& m) { e += m * f.value(x); });
  return e;
}

std::optional<Word> monotonicity_defect(const EnumerableFunctional& f, std::size_t alphabet, std::size_t depth) {
  Word x(alphabet);
  std::optional<Word> defect;
  std::function<void(const Rational&)> walk = [&](const Rational& fx) {
    if (defect || x.size() == depth) return;
    for (Symbol a = 0; a < alphabet && !defect; ++a) {
      x.push_back(a);
      const Rational next = f.value(x);
      if (next < fx) {
        defect = x;
      } else {
        walk(next);
      }
      x.pop_back();
    }
  };
  walk(f.value(x));
  return defect;
}

EnvPtr e2i_build_mubar(const Environment& mu, const EnumerableFunctional& f, std::size_t n) {
  const Rational eps = f.tolerance(n);
  if (eps <= 0) throw Error(ErrorCode::invalid_argument, "functional tolerance must be positive");
  std::map<Word, Rational> values;
  Rational expectation = 0;
  for_each_support(mu, n, [&](const Word& x, const Rational& m) {
    const Rational mass = m * f.value(x);
    if (mass == 0) return;
    expectation += mass;
    const Rational leaf = mass / eps;
    for (std::size_t k = 0; k <= n; ++k) values[x.prefix(k)] += leaf;
  });
  if (expectation > eps) {
    throw Error(ErrorCode::hypothesis_failed, "E[F_" + std::to_string(n) + "] = " + to_string(expectation) +
                                                  " exceeds eps_n = " + to_string(eps));
  }
  return make_table(mu.alphabet(), n, std::move(values), TailPolicy::zero);
}

IndividualBound e2i_individual_bound(const MixtureEnv& extended, std::size_t mubar_index,
                                     const EnumerableFunctional& f, const Environment& mu, const Word& omega,
                                     std::size_t n) {
  if (omega.size() < n) throw Error(ErrorCode::invalid_argument, "sequence shorter than requested horizon");
  const Rational w = dominance_constant(extended, mubar_index);
  const Word x = omega.prefix(n);
  const Rational mu_x = mu.eval(x);
  if (mu_x == 0) throw Error(ErrorCode::undefined_posterior, "'" + x.str() + "' lies outside the mu-support");
  const Rational eps = f.tolerance(n);
  const Rational fx = f.value(x);
  if (extended.component(mubar_index)->eval(x) < mu_x * fx / eps) {
    throw Error(ErrorCode::not_dominated, "component " + std::to_string(mubar_index) + " does not dominate mu F_n / eps_n");
  }
  const auto trace = deficiency_trace(extended, mu, omega, n);
  IndividualBound out{compare_le_exact("F_n <= eps_n/w * M/mu", fx, eps / w * trace.last().ratio),
                      compare_le_exact("F_n <= eps_n/w * 2^d", fx, eps / w * trace.last().sup_ratio), w};
  return out;
}

MixturePtr delta_hat(const ClassPtr& cls, const WeightScheme& weights, std::size_t k) {
  return std::make_shared<MixtureEnv>(cls, weights, MixtureMode::normalized_measures_only, k);
}

namespace {

const Environment& measure_at(const ClassPtr& cls, std::size_t k0) {
  if (k0 == 0 || k0 > cls->size() || !cls->is_measure(k0)) {
    throw Error(ErrorCode::invalid_k0, "index " + std::to_string(k0) + " is not a measure of the class");
  }
  return *(*cls)[k0];
}

}  // namespace

Prop8Report prop8_trace(const ClassPtr& cls, const WeightScheme& weights, std::size_t k0, const Word& omega,
                        std::size_t n, mpfr_prec_t precision) {
  const Environment& mu = measure_at(cls, k0);
  const auto dk0 = delta_hat(cls, weights, k0);
  const auto d_all = delta_hat(cls, weights, cls->size());
  const MixtureEnv reference(cls, weights, MixtureMode::raw);
  Prop8Report report;
  report.k0 = k0;
  for (const auto& s : hellinger_trace(*dk0, mu, omega, n, precision).steps) report.sum_h_mu.push_back(s.cumulative);
  for (const auto& s : hellinger_trace(*dk0, *d_all, omega, n, precision).steps) {
    report.sum_h_d.push_back(s.cumulative);
  }
  report.deficiency = deficiency_trace(reference, mu, omega, n, precision);
  return report;
}

Verdict prop8_expected_bound(const ClassPtr& cls, const WeightScheme& weights, std::size_t k0, std::size_t n,
                             mpfr_prec_t start) {
  const Environment& mu = measure_at(cls, k0);
  const auto dk0 = delta_hat(cls, weights, k0);
  return certify_le("E[exp(H/2)] <= eps_k0^-1/2 (k0=" + std::to_string(k0) + ")", [&](mpfr_prec_t prec) {
    return IntervalPair{expected_exp_half_sum(*dk0, mu, n, Rational(1, 2), prec),
                        Interval(Rational(1), prec) / sqrt(Interval(weights(k0), prec))};
  }, start);
}

RatioBoundReport ratio_bound_check(const ClassPtr& cls, const WeightScheme& weights, std::size_t depth) {
  RatioBoundReport report;
  const auto first = cls->first_measure();
  if (!first) return report;
  const Rational eps_o = weights(*first);
  for (std::size_t k = *first + 1; k <= cls->size(); ++k) {
    const auto lower = delta_hat(cls, weights, k - 1);
    const auto upper = delta_hat(cls, weights, k);
    const Rational bound = 1 + weights(k) / eps_o;
    for (std::size_t len = 0; len <= depth; ++len) {
      for_each_support(*upper, len, [&](const Word& x, const Rational& v) {
        ++report.checked;
        const Rational scaled = lower->eval(x.symbols()) / v / bound;
        if (scaled > report.worst) report.worst = scaled;
        if (scaled > 1 && report.holds) {
          report.holds = false;
          report.violation = std::make_pair(k, x);
        }
      });
    }
  }
  return report;
}

}  // namespace semilab
