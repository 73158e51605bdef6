#include "semilab/error.hpp"
#include "semilab/spec.hpp"

#include <gtest/gtest.h>

namespace semilab {
namespace {

using nlohmann::json;

Rational q(const char* text) { return parse_rational(text); }
Word w(const char* text) { return Word::parse(text, 2); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::io;
}

TEST(Spec, Bernoulli) {
  auto env = parse_env(json::parse(R"({"kind":"bernoulli","p":"1/3"})"));
  EXPECT_EQ(env->eval(w("11")), q("1/9"));
  EXPECT_EQ(code_of([] { parse_env(json::parse(R"({"kind":"bernoulli","p":"4/3"})")); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { parse_env(json::parse(R"({"kind":"bernoulli","p":"x"})")); }), ErrorCode::parse);
}

TEST(Spec, ErrorNamesPath) {
  try {
    parse_env(json::parse(R"({"kind":"leaky","leak":"1/2","base":{"kind":"bernoulli","p":"3/2"}})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/base"), std::string::npos) << e.what();
  }
}

TEST(Spec, RoundTrip) {
  const char* specs[] = {
      R"({"kind":"uniform","alphabet":3})",
      R"({"kind":"categorical","probs":["1/6","1/3","1/2"]})",
      R"({"kind":"markov","alphabet":2,"order":1,"rows":{"0":["1/3","2/3"],"1":["3/4","1/4"]}})",
      R"({"kind":"decaying","beta":3})",
      R"({"kind":"deterministic","prefix":"1","cycle":"0"})",
      R"({"kind":"leaky","leak":"1/2","base":{"kind":"bernoulli","p":"1/2"}})",
      R"({"kind":"derived","op":"scaled","c":"1/2","base":{"kind":"uniform"}})",
      R"({"kind":"derived","op":"mixture","mode":"raw","class":[{"env":{"kind":"uniform"},"weight":"1/2"},{"env":{"kind":"bernoulli","p":"1/3"},"weight":"1/4"}]})",
      R"({"kind":"derived","op":"nu_stage","alpha":"0110"})",
  };
  for (const char* text : specs) {
    auto env = parse_env(json::parse(text));
    auto again = parse_env(env->to_json());
    for (const char* x : {"", "0", "01", "110", "0101"}) {
      const Word word = Word::parse(x, env->alphabet());
      EXPECT_EQ(env->eval(word), again->eval(word)) << text << " at " << x;
    }
  }
}

TEST(Spec, ClassWeights) {
  const auto defaults = parse_class(json::parse(R"([{"kind":"uniform"},{"kind":"bernoulli","p":"1/3"}])"));
  EXPECT_TRUE(defaults.weights.is_default());
  EXPECT_EQ(defaults.weights(2), q("1/256"));
  const auto given = parse_class(json::parse(R"([{"env":{"kind":"uniform"},"weight":"0.5"}])"));
  EXPECT_EQ(given.weights(1), q("1/2"));
  EXPECT_EQ(code_of([] {
              parse_class(json::parse(R"([{"env":{"kind":"uniform"},"weight":"1/2"},{"kind":"uniform"}])"));
            }),
            ErrorCode::parse);
}

TEST(Spec, DeclaredClassChecked) {
  EXPECT_NO_THROW(parse_env(json::parse(R"({"kind":"bernoulli","p":"1/2","declared_class":"measure"})")));
  EXPECT_EQ(code_of([] {
              parse_env(json::parse(
                  R"({"kind":"leaky","leak":"1/2","base":{"kind":"uniform"},"declared_class":"measure"})"));
            }),
            ErrorCode::validation);
}

TEST(Spec, TableSemimeasureViolation) {
  EXPECT_EQ(code_of([] {
              parse_env(json::parse(
                  R"({"kind":"table","alphabet":2,"depth":1,"values":{"":"1/2","0":"1/2","1":"1/4"}})"));
            }),
            ErrorCode::validation);
}

TEST(Spec, BareClassIsRawMixture) {
  auto mix = parse_mixture(json::parse(R"([{"env":{"kind":"uniform"},"weight":"1/2"}])"));
  EXPECT_EQ(mix->mode(), MixtureMode::raw);
  EXPECT_EQ(mix->eval(w("0")), q("1/4"));
}

TEST(Spec, Functionals) {
  auto f = parse_functional(json::parse(R"({"kind":"indicator","eps":"1/4"})"));
  EXPECT_EQ(f->value(w("000")), 2);
  EXPECT_EQ(f->value(w("010")), 0);
  EXPECT_THROW(parse_functional(json::parse(R"({"kind":"nope","eps":"1/4"})")), Error);
}

TEST(Spec, LoadJson) {
  EXPECT_EQ(load_json(R"({"a":1})").at("a"), 1);
  EXPECT_EQ(code_of([] { load_json("/nonexistent/spec.json"); }), ErrorCode::io);
  EXPECT_EQ(code_of([] { load_json("{oops"); }), ErrorCode::parse);
}

}  // namespace
}  // namespace semilab
