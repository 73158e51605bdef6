#include "semilab/divergence.hpp"
#include "semilab/envcore.hpp"
#include "semilab/error.hpp"
#include "semilab/mixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace semilab {
namespace {

Rational q(const char* text) { return parse_rational(text); }

EnvPtr three_bernoulli() {
  auto cls = std::make_shared<const EnvClass>(
      std::vector<EnvPtr>{make_bernoulli(q("1/4")), make_bernoulli(q("1/2")), make_bernoulli(q("3/4"))}, 8);
  return std::make_shared<const MixtureEnv>(
      cls, WeightScheme::explicit_weights({q("1/3"), q("1/3"), q("1/3")}), MixtureMode::raw);
}

double d(const Rational& x) { return x.get_d(); }

// Floating-point oracle: enumerates all mu-paths of length n and accumulates
// expected per-step quantities from the exact posteriors.
struct Oracle {
  double sqrt_ratio = 0;
  double hellinger = 0;
  double exp_half = 0;
};

Oracle brute_force(const Environment& nu, const Environment& mu, std::size_t n, double kappa) {
  Oracle o;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Word x(2);
    double mass = 1;
    double g = 0;
    for (std::size_t t = 0; t < n && mass > 0; ++t) {
      const Rational mux = mu.eval(x);
      const Rational nux = nu.eval(x);
      double gk = 0;
      for (Symbol a = 0; a < 2; ++a) {
        const double m = d(mu.eval(x.extended(a)) / mux);
        const double v = d(nu.eval(x.extended(a)) / nux);
        gk += std::pow(std::abs(std::pow(v, kappa) - std::pow(m, kappa)), 1 / kappa);
      }
      const Symbol a = (bits >> t) & 1;
      mass *= d(mu.eval(x.extended(a)) / mux);
      x.push_back(a);
      g += gk;
    }
    o.exp_half += mass * std::exp(g / 2);
  }
  for (std::size_t t = 0; t < n; ++t) {
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << t); ++bits) {
      Word x(2);
      for (std::size_t i = 0; i < t; ++i) x.push_back((bits >> i) & 1);
      const Rational mux = mu.eval(x);
      if (mux == 0) continue;
      const Rational nux = nu.eval(x);
      for (Symbol a = 0; a < 2; ++a) {
        const double m = d(mu.eval(x.extended(a)) / mux);
        const double v = d(nu.eval(x.extended(a)) / nux);
        o.hellinger += d(mux) * std::pow(std::sqrt(v) - std::sqrt(m), 2);
        if (m > 0) o.sqrt_ratio += d(mux) * m * std::pow(std::sqrt(v / m) - 1, 2);
      }
    }
  }
  return o;
}

TEST(Hellinger, ClosedForms) {
  const std::vector<Rational> p{1, 0}, half{q("1/2"), q("1/2")};
  EXPECT_TRUE(hellinger_step(p, half).contains(0) == false);
  EXPECT_NEAR(hellinger_step(p, half).mid_double(), 2 - std::sqrt(2.0), 1e-15);
  const std::vector<Rational> a{q("1/4"), q("3/4")}, b{q("3/4"), q("1/4")};
  EXPECT_NEAR(hellinger_step(a, b).mid_double(), 2 - std::sqrt(3.0), 1e-15);
  EXPECT_TRUE(hellinger_step(a, a).is_point());
  EXPECT_TRUE(hellinger_step(a, a).contains(0));
}

TEST(Hellinger, KappaHalfIsHellinger) {
  const std::vector<Rational> a{q("1/5"), q("4/5")}, b{q("2/3"), q("1/3")};
  const auto h = hellinger_step(a, b);
  const auto k = kappa_step(a, b, q("1/2"));
  EXPECT_NEAR(h.mid_double(), k.mid_double(), 1e-30);
}

TEST(RowInequality, Example) {
  const std::vector<Rational> p{q("1/2"), q("1/2")}, r{q("1/2"), 0};
  EXPECT_NEAR(bhattacharyya_step(p, r).mid_double(), 0.5, 1e-30);
  EXPECT_NEAR(hellinger_step(p, r).mid_double(), 0.5, 1e-30);
  for (const auto& v : row_inequality(p, r)) EXPECT_EQ(v.outcome, Outcome::holds) << v.label;
}

TEST(RowInequality, EqualityCaseDecidedExactly) {
  const std::vector<Rational> p{q("1/3"), q("2/3")};
  for (const auto& v : row_inequality(p, p)) EXPECT_EQ(v.outcome, Outcome::holds) << v.label;
}

TEST(Property, RandomRowsNeverFail) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> num(0, 20);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Rational> p(3), r(3);
    Rational sp = 0, sr = 0;
    for (int i = 0; i < 3; ++i) {
      p[i] = num(gen) + 1;
      r[i] = num(gen);
      sp += p[i];
      sr += r[i];
    }
    const Rational scale = sr + num(gen);
    for (int i = 0; i < 3; ++i) {
      p[i] /= sp;
      r[i] = scale == 0 ? Rational(0) : Rational(r[i] / scale);
    }
    for (const auto& v : row_inequality(p, r, 128, 512)) EXPECT_NE(v.outcome, Outcome::fails);
  }
}

TEST(ExpectedSums, MatchBruteForce) {
  auto nu = three_bernoulli();
  auto mu = make_bernoulli(q("1/2"));
  for (std::size_t n : {1u, 4u, 8u}) {
    const auto o = brute_force(*nu, *mu, n, 0.5);
    const auto s = expected_hellinger_sums(*nu, *mu, n);
    EXPECT_NEAR(s.hellinger_sum.mid_double(), o.hellinger, 1e-12);
    EXPECT_NEAR(s.sqrt_ratio_sum.mid_double(), o.sqrt_ratio, 1e-12);
    EXPECT_EQ(s.gap, 0);
    EXPECT_NEAR(expected_exp_half_sum(*nu, *mu, n, q("1/2")).mid_double(), o.exp_half, 1e-10);
    const auto quarter = brute_force(*nu, *mu, n, 0.25);
    EXPECT_NEAR(expected_exp_half_sum(*nu, *mu, n, q("1/4")).mid_double(), quarter.exp_half, 1e-10);
  }
}

TEST(ExpectedSums, GapIsExcludedMass) {
  // mu never emits 1; nu puts 1/4 on it at every step.
  auto mu = make_deterministic(Word(2), Word::parse("0", 2));
  auto nu = make_bernoulli(q("1/4"));
  const auto s = expected_hellinger_sums(*nu, *mu, 3);
  // nu(1 | 0^t) = 1/4 at each of the 3 steps.
  EXPECT_EQ(s.gap, q("3/4"));
}

TEST(BoundChain, ThreeBernoulli) {
  auto nu = three_bernoulli();
  auto mu = make_bernoulli(q("1/2"));
  for (const auto& v : hellinger_bound_chain(*nu, *mu, 10, q("1/3"))) {
    EXPECT_EQ(v.outcome, Outcome::holds) << v.label;
    EXPECT_LE(v.precision, 256);
  }
  const auto half = kappa_bound(*nu, *mu, 10, q("1/3"), q("1/2"));
  const auto quarter = kappa_bound(*nu, *mu, 10, q("1/3"), q("1/4"));
  EXPECT_TRUE(half.holds());
  EXPECT_TRUE(quarter.holds());
}

TEST(Property, BoundChainOnDominatedPairs) {
  struct Pair {
    EnvPtr nu, mu;
    Rational w;
  };
  auto mk = [](std::vector<EnvPtr> members, std::vector<Rational> ws) {
    auto cls = std::make_shared<const EnvClass>(members, 8);
    return std::make_shared<const MixtureEnv>(cls, WeightScheme::explicit_weights(ws), MixtureMode::raw);
  };
  std::vector<Pair> pairs{
      {three_bernoulli(), make_bernoulli(q("1/4")), q("1/3")},
      {mk({make_bernoulli(q("1/3")), make_uniform(2)}, {q("1/4"), q("3/4")}), make_bernoulli(q("1/3")), q("1/4")},
      {mk({make_decaying(3), make_bernoulli(q("2/3"))}, {q("1/2"), q("1/2")}), make_decaying(3), q("1/2")},
  };
  for (const auto& pr : pairs) {
    check_dominance(*pr.nu, *pr.mu, 6, pr.w);
    for (std::size_t n = 1; n <= 6; ++n)
      for (const auto& v : hellinger_bound_chain(*pr.nu, *pr.mu, n, pr.w)) EXPECT_NE(v.outcome, Outcome::fails) << v.label;
  }
}

TEST(Dominance, Violation) {
  try {
    check_dominance(*make_bernoulli(q("1/4")), *make_bernoulli(q("3/4")), 4, q("1/2"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_dominated);
  }
}

TEST(MarkovTail, Holds) {
  auto nu = three_bernoulli();
  auto mu = make_bernoulli(q("1/2"));
  for (const char* c : {"1", "2", "4"}) {
    const auto r = markov_tail_check(*nu, *mu, 10, q("1/3"), q(c));
    EXPECT_EQ(r.verdict.outcome, Outcome::holds);
    EXPECT_LE(d(r.exceed_mass), std::exp(-d(q(c)) / 2));
  }
}

TEST(Trace, AlternatingPath) {
  auto nu = three_bernoulli();
  auto mu = make_bernoulli(q("1/2"));
  const auto omega = Word::parse("0101010101010101", 2);
  const auto trace = hellinger_trace(*nu, *mu, omega, 16);
  ASSERT_EQ(trace.steps.size(), 16u);
  EXPECT_LE(trace.steps.back().cumulative.hi_double(), std::log(3.0));
  // nu_t / mu_t on the observed symbol: posterior over 3 coins, oracle by Bayes.
  double post[3] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const double ps[3] = {0.25, 0.5, 0.75};
  for (std::size_t t = 0; t < 16; ++t) {
    const int a = omega[t];
    double pred = 0;
    for (int i = 0; i < 3; ++i) pred += post[i] * (a ? ps[i] : 1 - ps[i]);
    EXPECT_NEAR(d(trace.steps[t].ratio), pred / 0.5, 1e-12);
    for (int i = 0; i < 3; ++i) post[i] = post[i] * (a ? ps[i] : 1 - ps[i]) / pred;
  }
}

TEST(Property, TraceScaleInvariant) {
  auto nu = three_bernoulli();
  auto mu = make_bernoulli(q("1/2"));
  const auto omega = Word::parse("0110100110010110", 2);
  const auto base = hellinger_trace(*nu, *mu, omega, 16);
  for (const char* c : {"1/3", "7/8", "1"}) {
    const auto scaled = hellinger_trace(*make_scaled(nu, q(c)), *mu, omega, 16);
    for (std::size_t t = 0; t < 16; ++t) {
      EXPECT_EQ(scaled.steps[t].ratio, base.steps[t].ratio);
      EXPECT_EQ(scaled.steps[t].max_diff, base.steps[t].max_diff);
      EXPECT_EQ(scaled.steps[t].h.lo_string(), base.steps[t].h.lo_string());
      EXPECT_EQ(scaled.steps[t].h.hi_string(), base.steps[t].h.hi_string());
    }
  }
}

TEST(Property, PrecisionNeverFlipsCertifiedVerdict) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> num(0, 12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Rational> p(2), r(2);
    p[0] = Rational(num(gen) + 1, 14);
    p[1] = 1 - p[0];
    r[0] = Rational(num(gen), 26);
    r[1] = Rational(num(gen), 26);
    const auto low = row_inequality(p, r, 32, 32);
    const auto mid = row_inequality(p, r, 64, 64);
    const auto high = row_inequality(p, r, 512, 512);
    for (std::size_t i = 0; i < low.size(); ++i) {
      for (const auto* v : {&low[i], &mid[i]}) {
        if (v->outcome != Outcome::inconclusive) EXPECT_EQ(v->outcome, high[i].outcome);
      }
      EXPECT_LE(high[i].lhs.width(), low[i].lhs.width());
    }
  }
}

TEST(Chain, Examples) {
  const std::vector<Row> three{{1, 0}, {q("1/2"), q("1/2")}, {0, 1}};
  const auto v = chain_inequality(three, Rational(1));
  EXPECT_EQ(v.outcome, Outcome::holds);
    // (1+1) h(p,r) + (1+1) h(r,q) with h(p,r) = h(r,q) = 2 - sqrt 2.
  EXPECT_NEAR(v.rhs.mid_double(), 4 * (2 - std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(v.lhs.mid_double(), 2.0, 1e-12);
  EXPECT_EQ(chain_inequality(three, Rational(1), q("1/10")).outcome, Outcome::fails);
}

TEST(Property, ChainPartTwoRandomTrials) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> num(0, 16);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + trial % 5;
    std::vector<Row> chain;
    for (std::size_t k = 0; k < m; ++k) {
      Row r(3);
      for (auto& x : r) x = Rational(num(gen), 16 * 3);
      chain.push_back(r);
    }
    EXPECT_NE(chain_inequality(chain, std::nullopt).outcome, Outcome::fails);
  }
}

TEST(ProductIdentity, AllPathsHold) {
  const auto c = product_identity_check(*three_bernoulli(), *make_bernoulli(q("1/2")), 8, q("1/3"));
  EXPECT_EQ(c.paths, 256u);
  EXPECT_EQ(c.holds, 256u);
}

}  // namespace
}  // namespace semilab
