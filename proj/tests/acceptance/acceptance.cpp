// Acceptance run: one line per criterion, exit 0 iff every criterion passes.

#include "semilab/counterexample.hpp"
#include "semilab/divergence.hpp"
#include "semilab/environment.hpp"
#include "semilab/experiments.hpp"
#include "semilab/mixtures.hpp"
#include "semilab/parallel.hpp"
#include "semilab/spec.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace semilab;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kChainSeconds = 10;
constexpr double kKappaSeconds = 30;
constexpr mpfr_prec_t kChainMaxBits = 256;
constexpr double kRowInconclusive128 = 0.01;
constexpr long kDecayingLength = 1000000;
constexpr double kDecayingLo = 0.449;
constexpr double kDecayingHi = 0.452;
constexpr double kDecayingSeconds = 60;
constexpr std::size_t kLeftmostDepth = 64;
constexpr std::uint64_t kSeed = 20240601;

std::string fixture(const std::string& name) { return std::string(SEMILAB_FIXTURE_DIR) + "/" + name; }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Result {
  bool pass = false;
  std::string detail;
};

ExperimentConfig config(const std::string& sub, const std::string& file, std::optional<std::uint64_t> seed = {},
                        std::optional<std::size_t> depth = {}) {
  ExperimentConfig c;
  c.subcommand = sub;
  c.spec = load_json(fixture(file));
  c.seed = seed;
  c.depth = depth;
  return c;
}

json report_of(const RunResult& r) {
  auto it = r.artifacts.find("report.json");
  return it == r.artifacts.end() ? json::object() : json::parse(it->second);
}

std::string counts(const RunResult& r) {
  std::size_t h = 0;
  for (const auto& v : r.verdicts) h += v.holds();
  return std::to_string(h) + "/" + std::to_string(r.verdicts.size()) + " verdicts hold";
}

bool all_hold(const RunResult& r) { return r.exit_code() == 0; }

// Every seeded experiment used by the criteria, rerun for the determinism check.
std::vector<ExperimentConfig> determinism_runs() {
  return {
      config("verify-hellinger-bounds", "hellinger_three_bernoulli.json", kSeed),
      config("markov-tail", "markov_tail_three_bernoulli.json"),
      config("verify-hellinger-bounds", "row_inequality.json", kSeed, 4),
      config("chain-lemma", "chain_lemma.json", kSeed),
      config("leftmost-alpha", "leftmost_canonical.json", {}, kLeftmostDepth),
      config("leftmost-alpha", "leftmost_three_bernoulli.json", {}, kLeftmostDepth),
      config("leftmost-alpha", "leftmost_w_vs_d_class.json", {}, kLeftmostDepth),
      config("counterexample", "counterexample_canonical.json"),
      config("w-vs-d", "w_vs_d.json", kSeed),
      config("e2i", "e2i_indicator.json", kSeed),
      config("prop8", "prop8_three_measures.json", kSeed),
  };
}

EnvPtr three_bernoulli() { return parse_env(load_json(fixture("three_bernoulli_env.json"))); }

Result criterion_1() {
  auto nu = three_bernoulli();
  auto mu = make_bernoulli(Rational(1, 2));
  const auto start = Clock::now();
  const auto links = hellinger_bound_chain(*nu, *mu, 10, Rational(1, 3));
  const double secs = seconds_since(start);
  bool ok = links.size() == 3 && secs < kChainSeconds;
  const auto sums = expected_hellinger_sums(*nu, *mu, 10);
  std::ostringstream d;
  d << "sqrt-ratio " << sums.sqrt_ratio_sum.hi_string(6) << ", Hellinger " << sums.hellinger_sum.hi_string(6)
    << " (exact gap " << to_string(sums.gap) << "); ";
  for (const auto& v : links) {
    ok = ok && v.holds() && v.precision <= kChainMaxBits;
    if (!v.exact) d << "[" << v.lhs.hi_string(6) << " <= " << v.rhs.lo_string(6) << " @" << v.precision << "b] ";
  }
  d << secs << " s";
  return {ok, d.str()};
}

Result criterion_2() {
  auto nu = three_bernoulli();
  auto mu = make_bernoulli(Rational(1, 2));
  const auto start = Clock::now();
  bool ok = true;
  std::ostringstream d;
  for (const char* k : {"1/2", "1/4"}) {
    const auto v = kappa_bound(*nu, *mu, 10, Rational(1, 3), parse_rational(k));
    ok = ok && v.holds();
    d << "kappa " << k << ": " << v.lhs.hi_string(6) << " <= 1; ";
  }
  const double secs = seconds_since(start);
  d << secs << " s";
  return {ok && secs < kKappaSeconds, d.str()};
}

Result criterion_3() {
  auto nu = three_bernoulli();
  auto mu = make_bernoulli(Rational(1, 2));
  bool ok = true;
  std::ostringstream d;
  for (const char* c : {"1", "2", "4"}) {
    const auto t = markov_tail_check(*nu, *mu, 10, Rational(1, 3), parse_rational(c));
    ok = ok && t.verdict.holds();
    d << "c=" << c << ": P=" << to_string(t.exceed_mass) << " <= " << t.bound.lo_string(6) << "; ";
  }
  return {ok, d.str()};
}

Result criterion_4() {
  const auto r = run_experiment(config("verify-hellinger-bounds", "row_inequality.json", kSeed, 4));
  const auto rep = report_of(r);
  const auto& rows = rep.at("rows");
  bool ok = rows.size() == 2;
  std::ostringstream d;
  for (const auto& row : rows) {
    const auto& v = row.at("verdicts");
    const double trials = v.at("trials").get<double>();
    const double inconclusive = v.at("inconclusive").get<double>();
    const long bits = row.at("cap_bits").get<long>();
    ok = ok && v.at("fails") == 0;
    if (bits == 128) ok = ok && inconclusive <= kRowInconclusive128 * trials;
    if (bits == 512) ok = ok && inconclusive == 0;
    d << bits << " bits: " << v.at("holds") << " hold, " << v.at("fails") << " fail, " << inconclusive
      << " inconclusive of " << trials << "; ";
  }
  return {ok, d.str()};
}

Result criterion_5() {
  const auto r = run_experiment(config("chain-lemma", "chain_lemma.json", kSeed));
  const auto rep = report_of(r);
  std::size_t fails = 0, trials = 0;
  for (const auto& part : rep.at("parts")) {
    fails += part.at("verdicts").at("fails").get<std::size_t>();
    trials += part.at("verdicts").at("trials").get<std::size_t>();
  }
  return {fails == 0 && trials >= 4000,
          std::to_string(trials) + " trials, " + std::to_string(fails) + " certified fails"};
}

Result criterion_6() {
  auto env = make_decaying(3);
  const Word zeros(2, std::vector<Symbol>(kDecayingLength, 0));
  const auto start = Clock::now();
  const Rational v = env->eval(zeros);
  const double secs = seconds_since(start);
  const Interval iv(v, 64);
  const bool ok = iv.lo_double() >= kDecayingLo && iv.hi_double() <= kDecayingHi && secs < kDecayingSeconds;
  std::ostringstream d;
  d << "value in [" << iv.lo_string(8) << ", " << iv.hi_string(8) << "], exact, " << secs << " s";
  return {ok, d.str()};
}

Result criterion_7() {
  bool ok = true;
  std::ostringstream d;
  for (const char* f : {"leftmost_canonical.json", "leftmost_three_bernoulli.json", "leftmost_w_vs_d_class.json"}) {
    const auto r = run_experiment(config("leftmost-alpha", f, {}, kLeftmostDepth));
    const auto side = json::parse(r.artifacts.at("alpha.json"));
    bool bound = side.at("steps").size() == kLeftmostDepth;
    for (const auto& s : side.at("steps")) {
      const long n = s.at("n").get<long>();
      bound = bound && parse_rational(s.at("prefix_mass").get<std::string>()) <= pow2(-n);
    }
    ok = ok && bound && all_hold(r);
    d << f << ": alpha " << side.at("alpha").get<std::string>().substr(0, 8) << "... " << (bound ? "ok" : "VIOLATED")
      << "; ";
  }
  return {ok, d.str()};
}

Result criterion_8() {
  const auto r = run_experiment(config("counterexample", "counterexample_canonical.json"));
  const auto rep = report_of(r);
  const auto& positions = rep.at("positions");
  // (8/9 nu(0) + 1/9 M(0)) / (8/9 nu(e) + 1/9 M(e)), nu(0) = nu(e) = 1/4,
  // M(0) = 1/2 * 1/2 + 1/4 * 1 + 1/8 * 0, M(e) = 1/2 + 1/4 + 1/8.
  const Rational m0 = Rational(1, 2) * Rational(1, 2) + Rational(1, 4);
  const Rational me = Rational(1, 2) + Rational(1, 4) + Rational(1, 8);
  const Rational oracle = (Rational(8, 9) * Rational(1, 4) + Rational(1, 9) * m0) /
                          (Rational(8, 9) * Rational(1, 4) + Rational(1, 9) * me);
  bool ok = all_hold(r) && !positions.empty();
  for (const auto& p : positions) ok = ok && p.at("certified").get<bool>();
  const Rational first = positions.empty() ? Rational(0)
                                           : parse_rational(positions[0].at("mprime_posterior").get<std::string>());
  ok = ok && first == oracle && oracle == Rational(20, 23) && first >= Rational(2, 3);
  return {ok, std::to_string(positions.size()) + " position(s), first posterior " + to_string(first) +
                  " (oracle " + to_string(oracle) + ")"};
}

Result criterion_9() {
  const auto spec = load_json(fixture("w_vs_d.json"));
  const auto cs = parse_class(spec.at("class"));
  auto tilde = std::dynamic_pointer_cast<const QuasimeasureEnv>(quasimeasure_transform((*cs.cls)[2]));
  const auto cut = tilde->cutoff(16);
  const auto r = run_experiment(config("w-vs-d", "w_vs_d.json", kSeed));
  const auto rep = report_of(r);
  const bool ok = cut == std::optional<std::size_t>(2) && all_hold(r) && rep.at("settle_depth") == 2;
  return {ok, "cutoff " + (cut ? std::to_string(*cut) : std::string("none")) + ", W = D from depth " +
                  rep.at("settle_depth").dump() + ", " + counts(r)};
}

Result criterion_10() {
  const auto r = run_experiment(config("e2i", "e2i_indicator.json", kSeed));
  const auto rep = report_of(r);
  const bool ok = all_hold(r) && rep.at("samples") == 100 && r.manifest.at("config").at("depth") == 10;
  return {ok, counts(r) + ", samples " + rep.at("samples").dump()};
}

Result criterion_11() {
  const auto r = run_experiment(config("prop8", "prop8_three_measures.json", kSeed));
  const auto rep = report_of(r);
  const bool ok = all_hold(r) && rep.at("k0") == json::array({1, 2}) && rep.at("ratio_bound").at("holds").get<bool>();
  return {ok, counts(r) + ", ratio worst " + rep.at("ratio_bound").at("worst").get<std::string>()};
}

Result criterion_12() {
  std::size_t compared = 0;
  std::string mismatch;
  for (const auto& c : determinism_runs()) {
    std::map<std::string, std::string> reference;
    for (unsigned workers : {1u, 2u, 8u}) {
      set_workers(workers);
      const auto r = run_experiment(c);
      if (workers == 1) {
        reference = r.artifacts;
      } else if (r.artifacts != reference && mismatch.empty()) {
        mismatch = c.subcommand + " at " + std::to_string(workers) + " workers";
      }
      ++compared;
    }
  }
  set_workers(1);
  return {mismatch.empty(), std::to_string(compared) + " runs compared" +
                                (mismatch.empty() ? std::string(", byte-identical") : ", differs: " + mismatch)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria{
      {"Hellinger bound chain, n=10", criterion_1},
      {"kappa generalization", criterion_2},
      {"Markov tail, c in {1,2,4}", criterion_3},
      {"row inequality, 1000 seeded rows", criterion_4},
      {"Hellinger chain inequality trials", criterion_5},
      {"decaying(3) constant at n=10^6", criterion_6},
      {"leftmost-random bound, n <= 64", criterion_7},
      {"counterexample posterior gap", criterion_8},
      {"quasimeasure cutoff and W = D", criterion_9},
      {"expected-to-individual bound", criterion_10},
      {"finite-class convergence analog", criterion_11},
      {"determinism across 1/2/8 workers", criterion_12},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
