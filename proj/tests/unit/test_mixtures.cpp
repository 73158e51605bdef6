#include "semilab/envcore.hpp"
#include "semilab/error.hpp"
#include "semilab/mixtures.hpp"

#include <gtest/gtest.h>

namespace semilab {
namespace {

Rational q(const char* text) { return parse_rational(text); }
Word w(const char* text) { return Word::parse(text, 2); }

std::vector<Word> words_upto(std::size_t depth) {
  std::vector<Word> out{Word(2)};
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].size() < depth)
      for (Symbol a = 0; a < 2; ++a) out.push_back(out[i].extended(a));
  return out;
}

ClassPtr make_class(std::vector<EnvPtr> members, std::size_t cert_depth = 8) {
  return std::make_shared<const EnvClass>(std::move(members), cert_depth);
}

ClassPtr canonical_class() {
  return make_class({make_uniform(2), make_deterministic(w(""), w("0")), make_deterministic(w("1"), w("0"))});
}

WeightScheme weights(std::initializer_list<const char*> values) {
  std::vector<Rational> out;
  for (const char* v : values) out.push_back(q(v));
  return WeightScheme::explicit_weights(out);
}

TEST(Weights, DefaultScheme) {
  EXPECT_EQ(default_weights(1).values(), (std::vector<Rational>{q("1/2")}));
  EXPECT_EQ(default_weights(2).values(), (std::vector<Rational>{q("1/2"), q("1/256")}));
  // i^-6 2^-i by direct evaluation.
  const auto ws = default_weights(12);
  for (std::size_t i = 1; i <= 12; ++i) {
    Integer den = 1;
    for (int k = 0; k < 6; ++k) den *= static_cast<unsigned long>(i);
    den <<= static_cast<mp_bitcnt_t>(i);
    EXPECT_EQ(ws(i), Rational(Integer(1), den));
  }
  EXPECT_LT(ws.total(), 1);
}

TEST(Weights, Validation) {
  EXPECT_THROW(weights({"1/2", "0"}), Error);
  EXPECT_THROW(weights({"3/4", "1/2"}), Error);
}

TEST(Mixture, Examples) {
  MixtureEnv single(make_class({make_uniform(2)}), weights({"1/2"}), MixtureMode::raw);
  EXPECT_EQ(single.eval(w("0")), q("1/4"));
  MixtureEnv canon(canonical_class(), weights({"1/2", "1/4", "1/8"}), MixtureMode::raw);
  EXPECT_EQ(canon.eval(w("")), q("7/8"));
}

TEST(Mixture, MeasuresOnlyEqualsRawOnMeasureClass) {
  auto cls = make_class({make_bernoulli(q("1/3")), make_uniform(2), make_decaying(3)});
  MixtureEnv raw(cls, default_weights(3), MixtureMode::raw);
  MixtureEnv only(cls, default_weights(3), MixtureMode::measures_only);
  for (const auto& x : words_upto(6)) EXPECT_EQ(raw.eval(x), only.eval(x));
}

TEST(Mixture, ModeOrdering) {
  auto cls = make_class({make_uniform(2), make_leaky(make_bernoulli(q("1/2")), q("1/2")), make_bernoulli(q("1/3"))});
  MixtureEnv raw(cls, default_weights(3), MixtureMode::raw);
  MixtureEnv quasi(cls, default_weights(3), MixtureMode::quasi);
  MixtureEnv only(cls, default_weights(3), MixtureMode::measures_only);
  for (const auto& x : words_upto(6)) {
    EXPECT_GE(raw.eval(x), quasi.eval(x));
    EXPECT_GE(quasi.eval(x), 0);
    EXPECT_GE(raw.eval(x), only.eval(x));
  }
}

TEST(Quasimeasure, MeasureIsFixedPoint) {
  auto fair = make_bernoulli(q("1/2"));
  auto tilde = quasimeasure_transform(fair, 10);
  for (const auto& x : words_upto(8)) EXPECT_EQ(tilde->eval(x), fair->eval(x));
}

TEST(Quasimeasure, LeakyCutoff) {
  auto leaky = make_leaky(make_bernoulli(q("1/2")), q("1/2"));
  auto tilde = std::dynamic_pointer_cast<const QuasimeasureEnv>(quasimeasure_transform(leaky, 10));
  ASSERT_TRUE(tilde);
  EXPECT_EQ(tilde->base_mass(1), q("1/2"));
  EXPECT_EQ(tilde->base_mass(2), q("1/4"));
  EXPECT_EQ(tilde->cutoff(10), std::optional<std::size_t>(2));
  EXPECT_EQ(tilde->eval(w("")), leaky->eval(w("")));
  EXPECT_EQ(tilde->eval(w("0")), q("1/4"));
  EXPECT_EQ(tilde->eval(w("01")), 0);
  EXPECT_EQ(tilde->eval(w("0110")), 0);
}

TEST(Quasimeasure, StrictBoundary) {
  // Layer masses 1, 1, 1/2: T_2 = 1/2 is not above 1 - 1/2.
  std::map<Word, Rational> v{{w(""), 1},        {w("0"), q("1/2")},  {w("1"), q("1/2")},
                             {w("00"), q("1/4")}, {w("01"), q("1/4")}, {w("10"), 0},
                             {w("11"), 0}};
  auto tilde = std::dynamic_pointer_cast<const QuasimeasureEnv>(quasimeasure_transform(make_table(2, 2, v), 2));
  EXPECT_EQ(tilde->eval(w("0")), q("1/2"));
  EXPECT_EQ(tilde->eval(w("00")), 0);
}

TEST(Quasimeasure, PointwiseBelowBaseAndMonotoneCutoff) {
  for (const char* leak : {"1/10", "1/5", "1/3"}) {
    auto base = make_leaky(make_categorical({q("1/3"), q("2/3")}), q(leak));
    auto tilde = std::dynamic_pointer_cast<const QuasimeasureEnv>(quasimeasure_transform(base, 12));
    const auto cut = tilde->cutoff(12);
    for (const auto& x : words_upto(8)) {
      EXPECT_LE(tilde->eval(x), base->eval(x));
      if (cut && x.size() >= *cut) EXPECT_EQ(tilde->eval(x), 0);
      if (!cut || x.size() < *cut) EXPECT_EQ(tilde->eval(x), base->eval(x));
    }
    EXPECT_TRUE(validate(*tilde, 8).is_semimeasure);
  }
}

TEST(Normalize, Examples) {
  auto fair = make_bernoulli(q("1/2"));
  auto same = normalize(fair, 6);
  for (const auto& x : words_upto(5)) EXPECT_EQ(same->eval(x), fair->eval(x));

  auto cls = make_class({make_uniform(2), make_bernoulli(q("1/3"))});
  auto d = std::make_shared<const MixtureEnv>(cls, weights({"1/2", "1/4"}), MixtureMode::measures_only);
  auto dhat = normalize(d, 6);
  // (1/2 * 1/2 + 1/4 * 2/3) / (3/4)
  EXPECT_EQ(dhat->eval(w("0")), (q("1/2") * q("1/2") + q("1/4") * q("2/3")) / q("3/4"));
  EXPECT_EQ(dhat->eval(w("0")), q("5/9"));
  EXPECT_EQ(dhat->eval(w("")), 1);
  EXPECT_TRUE(validate(*dhat, 6).is_measure_to_depth);
}

TEST(Normalize, RefusesLiveQuasiComponent) {
  auto cls = make_class({make_uniform(2), make_leaky(make_bernoulli(q("1/2")), q("1/2"))});
  auto quasi = std::make_shared<const MixtureEnv>(cls, default_weights(2), MixtureMode::quasi);
  try {
    normalize(quasi, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::approximable_not_measure);
  }
  EXPECT_NO_THROW(normalize(quasi, 1, true));
}

TEST(Normalize, ZeroMassRefused) {
  EXPECT_THROW(make_normalized(make_scaled(make_uniform(2), 0)), Error);
}

TEST(Dominance, ConstantsAndExclusion) {
  auto cls = make_class({make_uniform(2), make_leaky(make_bernoulli(q("1/2")), q("1/2")), make_bernoulli(q("1/3"))});
  MixtureEnv raw(cls, default_weights(3), MixtureMode::raw);
  EXPECT_EQ(dominance_constant(raw, 1), q("1/2"));
  for (std::size_t i = 1; i <= 3; ++i)
    for (const auto& x : words_upto(6)) EXPECT_GE(raw.eval(x), dominance_constant(raw, i) * cls->operator[](i)->eval(x));

  MixtureEnv only(cls, default_weights(3), MixtureMode::measures_only);
  try {
    dominance_constant(only, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_dominated);
  }

  MixtureEnv quasi(cls, default_weights(3), MixtureMode::quasi);
  for (const auto& x : words_upto(6))
    for (std::size_t i = 1; i <= 3; ++i) EXPECT_GE(quasi.eval(x), default_weights(3)(i) * quasi.component(i)->eval(x));
}

TEST(KX, Examples) {
  auto measures = make_class({make_uniform(2), make_bernoulli(q("1/3"))});
  MixtureEnv all(measures, default_weights(2), MixtureMode::quasi);
  for (const auto& x : words_upto(4)) EXPECT_FALSE(k_x(all, x).has_value());

  auto leaky = make_class({make_bernoulli(q("1/2")), make_leaky(make_bernoulli(q("1/2")), q("1/2"))});
  MixtureEnv w2(leaky, default_weights(2), MixtureMode::quasi);
  EXPECT_EQ(k_x(w2, w("0")), std::optional<std::size_t>(2));
  EXPECT_FALSE(k_x(w2, w("01")).has_value());

  auto two = make_class({make_uniform(2), make_leaky(make_uniform(2), q("1/100")), make_uniform(2), make_bernoulli(q("1/3")),
                         make_leaky(make_uniform(2), q("1/100"))});
  MixtureEnv w5(two, default_weights(5), MixtureMode::quasi);
  EXPECT_EQ(k_x(w5, w("0")), std::optional<std::size_t>(2));
}

TEST(Property, WBetweenDAndTail) {
  auto cls = make_class({make_bernoulli(q("1/2")), make_leaky(make_bernoulli(q("1/2")), q("1/2")), make_decaying(3),
                         make_leaky(make_bernoulli(q("1/3")), q("1/20")), make_bernoulli(q("3/4"))});
  const auto ws = default_weights(5);
  MixtureEnv wq(cls, ws, MixtureMode::quasi);
  MixtureEnv d(cls, ws, MixtureMode::measures_only);
  for (const auto& x : words_upto(8)) {
    const Rational wx = wq.eval(x);
    const Rational dx = d.eval(x);
    EXPECT_LE(dx, wx);
    const auto k = k_x(wq, x);
    if (!k) {
      EXPECT_EQ(wx, dx) << x.str();
      continue;
    }
    Rational tail = 0;
    for (std::size_t i = *k; i <= cls->size(); ++i)
      if (!cls->is_measure(i)) tail += ws(i) * wq.component(i)->eval(x);
    EXPECT_LE(wx, dx + tail);
  }
}

TEST(Stages, Rules) {
  auto target = std::make_shared<const MixtureEnv>(canonical_class(), weights({"1/2", "1/4", "1/8"}), MixtureMode::raw);
  StageApproximation exact{target, StageRule::exact};
  StageApproximation partial{target, StageRule::partial_sum};
  for (const auto& x : words_upto(6)) {
    EXPECT_EQ(stage_eval(exact, 1, x), target->eval(x));
    EXPECT_EQ(stage_eval(partial, 1, x), q("1/2") * make_uniform(2)->eval(x));
    EXPECT_EQ(stage_eval(partial, 3, x), target->eval(x));
    for (std::size_t t = 1; t < 5; ++t) EXPECT_LE(stage_eval(partial, t, x), stage_eval(partial, t + 1, x));
  }
}

TEST(EnvClass, MeasureCertification) {
  auto cls = make_class({make_leaky(make_uniform(2), q("1/4")), make_bernoulli(q("1/3"))});
  EXPECT_FALSE(cls->is_measure(1));
  EXPECT_TRUE(cls->is_measure(2));
  EXPECT_EQ(cls->first_measure(), std::optional<std::size_t>(2));
}

}  // namespace
}  // namespace semilab
