#include "semilab/envcore.hpp"

#include "semilab/error.hpp"

namespace semilab {

Rational PosteriorVec::sum() const {
  Rational s = 0;
  for (const auto& e : entries) s += e;
  return s;
}

PosteriorVec posterior(const Environment& env, const Word& x) {
  if (env.eval(x) == 0) {
    throw Error(ErrorCode::undefined_posterior, "posterior undefined at zero-mass string '" + x.str() + "'");
  }
  PosteriorVec out;
  out.entries.reserve(env.alphabet());
  for (Symbol a = 0; a < env.alphabet(); ++a) out.entries.push_back(env.conditional(x.symbols(), a));
  return out;
}

ValidationReport validate(const Environment& env, std::size_t depth) {
  ValidationReport report;
  report.depth = depth;
  Word x(env.alphabet());

  auto semimeasure_defect = [&](std::string what) {
    if (report.is_semimeasure) {
      report.is_semimeasure = false;
      report.first_defect_node = x;
      report.defect = std::move(what);
    }
    report.is_measure_to_depth = false;
  };
  auto measure_defect = [&] {
    if (report.is_measure_to_depth) report.first_measure_defect = x;
    report.is_measure_to_depth = false;
  };

  const Rational root = env.eval(x);
  if (root != 1) measure_defect();

  std::function<void(const Rational&)> walk = [&](const Rational& v) {
    ++report.nodes_checked;
    if (v < 0 || v > 1) semimeasure_defect("value " + to_string(v) + " outside [0,1]");
    if (x.size() == depth) return;
    if (v == 0 && env.zero_absorbing()) return;
    std::vector<Rational> children;
    children.reserve(env.alphabet());
    Rational sum = 0;
    for (Symbol a = 0; a < env.alphabet(); ++a) {
      x.push_back(a);
      children.push_back(env.eval(x.symbols()));
      x.pop_back();
      sum += children.back();
    }
    if (sum > v) {
      semimeasure_defect("children sum " + to_string(sum) + " exceeds node value " + to_string(v));
    } else if (sum != v) {
      measure_defect();
    }
    for (Symbol a = 0; a < env.alphabet(); ++a) {
      x.push_back(a);
      walk(children[a]);
      x.pop_back();
    }
  };
  walk(root);
  return report;
}

void for_each_support(const Environment& env, const Word& prefix, std::size_t depth,
                      const std::function<void(const Word&, const Rational&)>& visit, std::size_t node_cap) {
  if (prefix.size() > depth) return;
  Word x = prefix;
  std::size_t visited = 0;
  std::function<void()> walk = [&] {
    if (++visited > node_cap) {
      throw Error(ErrorCode::cap_exceeded, "support enumeration exceeded " + std::to_string(node_cap) + " nodes");
    }
    const Rational v = env.eval(x.symbols());
    if (x.size() == depth) {
      if (v != 0) visit(x, v);
      return;
    }
    if (v == 0 && env.zero_absorbing()) return;
    for (Symbol a = 0; a < env.alphabet(); ++a) {
      x.push_back(a);
      walk();
      x.pop_back();
    }
  };
  walk();
}

void for_each_support(const Environment& env, std::size_t depth,
                      const std::function<void(const Word&, const Rational&)>& visit, std::size_t node_cap) {
  for_each_support(env, Word(env.alphabet()), depth, visit, node_cap);
}

std::vector<std::pair<Word, Rational>> enumerate_support(const Environment& env, std::size_t depth,
                                                         std::size_t node_cap) {
  std::vector<std::pair<Word, Rational>> out;
  for_each_support(env, depth, [&](const Word& w, const Rational& v) { out.emplace_back(w, v); }, node_cap);
  return out;
}

std::size_t default_cert_depth(std::size_t alphabet, std::size_t requested) {
  constexpr std::size_t kBudget = std::size_t{1} << 16;
  std::size_t depth = 0;
  std::size_t level = 1;
  std::size_t nodes = 1;
  while (depth < requested) {
    level *= alphabet;
    if (nodes + level > kBudget) break;
    nodes += level;
    ++depth;
  }
  return depth;
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::at(std::uint64_t counter) const { return splitmix(seed_ ^ splitmix(counter)); }

Sample sample(const Environment& env, std::size_t length, std::uint64_t seed, std::optional<std::size_t> cert_depth) {
  const std::size_t depth = cert_depth.value_or(default_cert_depth(env.alphabet(), length));
  const auto report = validate(env, depth);
  if (!report.is_measure_to_depth) {
    throw Error(ErrorCode::not_a_measure, "sampling requires a measure; defect at '" +
                                              (report.first_measure_defect ? report.first_measure_defect->str()
                                                                           : report.first_defect_node->str()) +
                                              "'");
  }

  CounterRng rng(seed);
  Word x(env.alphabet());
  std::vector<Rational> chosen;
  chosen.reserve(length + 1);
  chosen.push_back(env.eval(x.symbols()));
  std::vector<Rational> cdf(env.alphabet() + 1);

  for (std::size_t t = 0; t < length; ++t) {
    cdf[0] = 0;
    for (Symbol a = 0; a < env.alphabet(); ++a) cdf[a + 1] = cdf[a] + env.conditional(x.symbols(), a);
    if (cdf.back() != 1) {
      throw Error(ErrorCode::not_a_measure, "posterior row at '" + x.str() + "' sums to " + to_string(cdf.back()));
    }
    // u lies in [num/2^bits, (num+1)/2^bits); refine until one CDF cell holds it.
    Integer num = 0;
    unsigned long bits = 0;
    std::optional<Symbol> pick;
    while (!pick) {
      num <<= 64;
      Integer chunk;
      const std::uint64_t r = rng.next();
      mpz_import(chunk.get_mpz_t(), 1, 1, sizeof r, 0, 0, &r);
      num += chunk;
      bits += 64;
      Rational lo(num), hi(num + 1);
      mpq_div_2exp(lo.get_mpq_t(), lo.get_mpq_t(), bits);
      mpq_div_2exp(hi.get_mpq_t(), hi.get_mpq_t(), bits);
      for (Symbol a = 0; a < env.alphabet(); ++a) {
        if (lo >= cdf[a] && hi <= cdf[a + 1]) {
          pick = a;
          break;
        }
      }
    }
    chosen.push_back(cdf[*pick + 1] - cdf[*pick]);
    x.push_back(*pick);
  }
  return {std::move(x), product(chosen)};
}

}  // namespace semilab
