#include "semilab/divergence.hpp"

#include "path_walk.hpp"
#include "semilab/envcore.hpp"
#include "semilab/error.hpp"

namespace semilab {

namespace {

Rational sum(std::span<const Rational> v) {
  Rational s = 0;
  for (const auto& x : v) s += x;
  return s;
}

void check_rows(std::span<const Rational> p, std::span<const Rational> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::invalid_argument, "row length mismatch: " + std::to_string(p.size()) + " vs " +
                                                 std::to_string(q.size()));
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || q[i] < 0) throw Error(ErrorCode::invalid_argument, "negative row entry");
  }
}

/// Adds sqrt(a) to `exact` when a is a perfect square, else to `approx`.
void add_sqrt(const Rational& a, Rational& exact, Interval& approx) {
  if (a == 0) return;
  Rational root;
  if (exact_sqrt(a, root)) {
    exact += root;
  } else {
    approx += sqrt(Interval(a, approx.precision()));
  }
}

/// sum_i sqrt(p_i q_i) as exact part + interval part.
Interval root_sum(std::span<const Rational> p, std::span<const Rational> q, mpfr_prec_t precision, Rational& exact) {
  Interval approx(precision);
  exact = 0;
  for (std::size_t i = 0; i < p.size(); ++i) add_sqrt(p[i] * q[i], exact, approx);
  return approx;
}

}  // namespace

Interval hellinger_step(std::span<const Rational> p, std::span<const Rational> q, mpfr_prec_t precision) {
  check_rows(p, q);
  Rational exact;
  Interval roots = root_sum(p, q, precision, exact);
  Interval h = Interval(sum(p) + sum(q) - 2 * exact, precision) - Interval(Rational(2), precision) * roots;
  return h.clamp_nonnegative();
}

Interval bhattacharyya_step(std::span<const Rational> p, std::span<const Rational> q, mpfr_prec_t precision) {
  check_rows(p, q);
  if (sum(p) != 1) throw Error(ErrorCode::not_a_measure_row, "row p sums to " + to_string(sum(p)) + ", not 1");
  if (sum(q) > 1) throw Error(ErrorCode::validation, "row q sums to " + to_string(sum(q)) + " > 1");
  Rational exact;
  Interval roots = root_sum(p, q, precision, exact);
  return Interval(exact, precision) + roots;
}

std::vector<Verdict> row_inequality(std::span<const Rational> p, std::span<const Rational> q, mpfr_prec_t start,
                                    mpfr_prec_t cap) {
  bhattacharyya_step(p, q, start);
  Verdict first = certify_le("N <= 1 - h/2", [&](mpfr_prec_t prec) {
    const Interval half(Rational(1, 2), prec);
    return IntervalPair{bhattacharyya_step(p, q, prec),
                        Interval(Rational(1), prec) - half * hellinger_step(p, q, prec)};
  }, start, cap);
  if (first.outcome == Outcome::inconclusive) {
    // (1 - h/2) - N = (1 - sum q)/2 exactly when sum p = 1.
    first = compare_le_exact("N <= 1 - h/2 (difference form)", 0, (1 - sum(q)) / 2, start);
  }
  Verdict second = certify_le("1 - h/2 <= exp(-h/2)", [&](mpfr_prec_t prec) {
    const Interval half_h = Interval(Rational(1, 2), prec) * hellinger_step(p, q, prec);
    return IntervalPair{Interval(Rational(1), prec) - half_h, exp(-half_h)};
  }, start, cap);
  return {std::move(first), std::move(second)};
}

Interval kappa_step(std::span<const Rational> p, std::span<const Rational> q, const Rational& kappa,
                    mpfr_prec_t precision) {
  if (kappa <= 0 || kappa > Rational(1, 2)) {
    throw Error(ErrorCode::invalid_argument, "kappa " + to_string(kappa) + " outside (0, 1/2]");
  }
  if (kappa == Rational(1, 2)) return hellinger_step(p, q, precision);
  check_rows(p, q);
  const Rational inv = 1 / kappa;
  Interval total(precision);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == q[i]) continue;
    const Interval d = abs(pow(Interval(p[i], precision), kappa) - pow(Interval(q[i], precision), kappa));
    total += pow(d, inv);
  }
  return total;
}

HellingerTrace hellinger_trace(const Environment& nu, const Environment& mu, const Word& omega, std::size_t n,
                               mpfr_prec_t precision) {
  if (omega.size() < n) throw Error(ErrorCode::invalid_argument, "sequence shorter than requested horizon");
  if (nu.alphabet() != mu.alphabet() || omega.alphabet() != mu.alphabet()) {
    throw Error(ErrorCode::invalid_argument, "alphabet mismatch in hellinger trace");
  }
  const std::size_t alphabet = mu.alphabet();
  HellingerTrace trace;
  trace.steps.reserve(n);
  Interval cumulative(precision);
  Rational mu_x = mu.eval(std::span<const Symbol>{});
  Rational nu_x = nu.eval(std::span<const Symbol>{});
  std::vector<Rational> mu_row(alphabet), nu_row(alphabet), mu_child(alphabet), nu_child(alphabet);
  for (std::size_t t = 1; t <= n; ++t) {
    const auto history = omega.symbols().first(t - 1);
    if (mu_x == 0 || nu_x == 0) {
      throw Error(ErrorCode::undefined_posterior,
                  std::string(mu_x == 0 ? "mu" : "nu") + " vanishes on " + omega.prefix(t - 1).str());
    }
    std::vector<Symbol> child(history.begin(), history.end());
    child.push_back(0);
    TraceStep step;
    step.t = t;
    for (Symbol a = 0; a < alphabet; ++a) {
      child.back() = a;
      mu_child[a] = mu.eval(child);
      nu_child[a] = nu.eval(child);
      mu_row[a] = mu_child[a] / mu_x;
      nu_row[a] = nu_child[a] / nu_x;
      const Rational diff = abs(nu_row[a] - mu_row[a]);
      if (diff > step.max_diff) step.max_diff = diff;
    }
    step.h = hellinger_step(nu_row, mu_row, precision);
    cumulative += step.h;
    step.cumulative = cumulative;
    const Symbol w = omega[t - 1];
    mu_x = mu_child[w];
    nu_x = nu_child[w];
    if (mu_x == 0 || nu_x == 0) {
      throw Error(ErrorCode::undefined_posterior,
                  std::string(mu_x == 0 ? "mu" : "nu") + " vanishes on " + omega.prefix(t).str());
    }
    step.ratio = nu_row[w] / mu_row[w];
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

namespace {

struct SumsAcc {
  mpfr_prec_t precision;
  Rational hell_exact = 0;
  Rational ratio_exact = 0;
  Rational cross_exact = 0;
  Interval cross;

  explicit SumsAcc(mpfr_prec_t p) : precision(p), cross(p) {}

  int step(const detail::NodeView& v) {
    if (!v.counted) return 0;
    Rational nu_sum = 0, nu_on = 0, mu_sum = 0;
    for (std::size_t a = 0; a < v.mu_row.size(); ++a) {
      nu_sum += v.nu_row[a];
      mu_sum += v.mu_row[a];
      if (v.mu_row[a] != 0) nu_on += v.nu_row[a];
      add_sqrt(v.mu_x * v.mu_x * v.nu_row[a] * v.mu_row[a], cross_exact, cross);
    }
    hell_exact += v.mu_x * (nu_sum + mu_sum);
    ratio_exact += v.mu_x * (nu_on + mu_sum);
    return 0;
  }
  void leaf(const Word&, const Rational&, const Rational&, std::span<const int>) {}
  void merge(SumsAcc&& o) {
    hell_exact += o.hell_exact;
    ratio_exact += o.ratio_exact;
    cross_exact += o.cross_exact;
    cross += o.cross;
  }
};

struct ExpAcc {
  mpfr_prec_t precision;
  Rational kappa;
  Interval total;

  ExpAcc(mpfr_prec_t p, Rational k) : precision(p), kappa(std::move(k)), total(p) {}

  Interval step(const detail::NodeView& v) { return kappa_step(v.nu_row, v.mu_row, kappa, precision); }
  void leaf(const Word&, const Rational& mu_x, const Rational&, std::span<const Interval> path) {
    Interval g(precision);
    for (const auto& s : path) g += s;
    total += Interval(mu_x, precision) * exp(Interval(Rational(1, 2), precision) * g);
  }
  void merge(ExpAcc&& o) { total += o.total; }
};

}  // namespace

ExpectedSums expected_hellinger_sums(const Environment& nu, const Environment& mu, std::size_t n,
                                     mpfr_prec_t precision) {
  auto acc = detail::walk_paths<SumsAcc>(nu, mu, n, [&] { return SumsAcc(precision); });
  const Interval two(Rational(2), precision);
  Interval cross = acc.cross + Interval(acc.cross_exact, precision);
  ExpectedSums out{Interval(acc.ratio_exact, precision) - two * cross,
                   Interval(acc.hell_exact, precision) - two * cross, acc.hell_exact - acc.ratio_exact};
  if (acc.cross.is_point()) {
    // Every root was exact: both sums are rationals.
    out.sqrt_ratio_sum = Interval(acc.ratio_exact - 2 * acc.cross_exact, precision);
    out.hellinger_sum = Interval(acc.hell_exact - 2 * acc.cross_exact, precision);
  }
  out.sqrt_ratio_sum = out.sqrt_ratio_sum.clamp_nonnegative();
  out.hellinger_sum = out.hellinger_sum.clamp_nonnegative();
  return out;
}

Interval expected_exp_half_sum(const Environment& nu, const Environment& mu, std::size_t n, const Rational& kappa,
                               mpfr_prec_t precision) {
  if (kappa <= 0 || kappa > Rational(1, 2)) {
    throw Error(ErrorCode::invalid_argument, "kappa " + to_string(kappa) + " outside (0, 1/2]");
  }
  auto acc = detail::walk_paths<ExpAcc>(nu, mu, n, [&] { return ExpAcc(precision, kappa); });
  return acc.total;
}

std::vector<Verdict> hellinger_bound_chain(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w,
                                 mpfr_prec_t start) {
  if (w <= 0 || w > 1) throw Error(ErrorCode::invalid_argument, "dominance weight must lie in (0,1]");
  check_dominance(nu, mu, n, w);
  for (mpfr_prec_t prec = start;; prec *= 2) {
    const ExpectedSums sums = expected_hellinger_sums(nu, mu, n, prec);
    const Interval e = expected_exp_half_sum(nu, mu, n, Rational(1, 2), prec);
    const Interval two_log_e = Interval(Rational(2), prec) * log(e);
    const Interval log_inv_w = log(Interval(1 / w, prec));

    std::vector<Verdict> out;
    Verdict first = compare_le("sqrt-ratio sum <= hellinger sum", sums.sqrt_ratio_sum, sums.hellinger_sum);
    if (first.outcome == Outcome::inconclusive) {
      first = compare_le_exact("sqrt-ratio sum <= hellinger sum (difference form)", 0, sums.gap, prec);
    }
    out.push_back(std::move(first));
    out.push_back(compare_le("hellinger sum <= 2 ln E[exp(H/2)]", sums.hellinger_sum, two_log_e));
    out.push_back(compare_le("2 ln E[exp(H/2)] <= ln 1/w", two_log_e, log_inv_w));
    for (auto& v : out) v.precision = prec;
    if (combine(out) != Outcome::inconclusive || prec * 2 > kMaxPrecision) return out;
  }
}

Verdict kappa_bound(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w,
                    const Rational& kappa, mpfr_prec_t start) {
  check_dominance(nu, mu, n, w);
  return certify_le("w^k E[exp(G/2)] <= 1 (k=" + to_string(kappa) + ")", [&](mpfr_prec_t prec) {
    const Interval e = expected_exp_half_sum(nu, mu, n, kappa, prec);
    return IntervalPair{pow(Interval(w, prec), kappa) * e, Interval(Rational(1), prec)};
  }, start);
}

void check_dominance(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w) {
  for (std::size_t t = 0; t <= n; ++t) {
    for_each_support(mu, t, [&](const Word& x, const Rational& m) {
      if (nu.eval(x.symbols()) < w * m) {
        throw Error(ErrorCode::not_dominated,
                    "nu(" + x.str() + ") < " + to_string(w) + " * mu(" + x.str() + ")");
      }
    });
  }
}

namespace {

struct TailAcc {
  mpfr_prec_t precision;
  const Interval* threshold;
  Rational exceed = 0;
  Rational unsure = 0;

  Interval step(const detail::NodeView& v) { return hellinger_step(v.nu_row, v.mu_row, precision); }
  void leaf(const Word&, const Rational& mu_x, const Rational&, std::span<const Interval> path) {
    Interval g(precision);
    for (const auto& s : path) g += s;
    if (mpfr_greaterequal_p(g.lo(), threshold->hi())) {
      exceed += mu_x;
    } else if (!mpfr_less_p(g.hi(), threshold->lo())) {
      unsure += mu_x;
    }
  }
  void merge(TailAcc&& o) {
    exceed += o.exceed;
    unsure += o.unsure;
  }
};

}  // namespace

TailReport markov_tail_check(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w,
                             const Rational& c, mpfr_prec_t start) {
  if (w <= 0 || w > 1) throw Error(ErrorCode::invalid_argument, "dominance weight must lie in (0,1]");
  if (c < 0) throw Error(ErrorCode::invalid_argument, "tail offset c must be nonnegative");
  check_dominance(nu, mu, n, w);
  for (mpfr_prec_t prec = start;; prec *= 2) {
    const Interval threshold = log(Interval(1 / w, prec)) + Interval(c, prec);
    const Interval bound = exp(-(Interval(c, prec) * Interval(Rational(1, 2), prec)));
    auto acc = detail::walk_paths<TailAcc>(nu, mu, n, [&] { return TailAcc{prec, &threshold}; });
    Verdict v = compare_le("P[H >= ln 1/w + c] <= exp(-c/2)",
                           Interval::hull(acc.exceed, acc.exceed + acc.unsure, prec), bound);
    v.precision = prec;
    if (v.outcome != Outcome::inconclusive || prec * 2 > kMaxPrecision) {
      return {acc.exceed, acc.unsure, threshold, bound, std::move(v)};
    }
  }
}

Verdict chain_inequality(const std::vector<Row>& vectors, std::optional<Rational> beta, const Rational& multiplier,
                         mpfr_prec_t start) {
  if (vectors.size() < 2) throw Error(ErrorCode::invalid_argument, "chain needs at least two vectors");
  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) throw Error(ErrorCode::invalid_argument, "chain dimension mismatch");
  }
  if (beta) {
    if (*beta <= 0) throw Error(ErrorCode::invalid_argument, "beta must be positive");
    if (vectors.size() > 3) throw Error(ErrorCode::invalid_argument, "beta form takes two or three vectors");
    const Row& p = vectors.front();
    const Row& q = vectors.back();
    const Row& r = vectors.size() == 3 ? vectors[1] : q;
    return certify_le("h(p,q) <= (1+b)h(p,r) + (1+1/b)h(r,q)", [&](mpfr_prec_t prec) {
      const Interval rhs = Interval(1 + *beta, prec) * hellinger_step(p, r, prec) +
                           Interval(1 + 1 / *beta, prec) * hellinger_step(r, q, prec);
      return IntervalPair{hellinger_step(p, q, prec), Interval(multiplier, prec) * rhs};
    }, start);
  }
  return certify_le("h(p1,pm) <= 3 sum k^2 h(p(k-1),pk)", [&](mpfr_prec_t prec) {
    Interval rhs(prec);
    for (std::size_t k = 2; k <= vectors.size(); ++k) {
      rhs += Interval(Rational(k * k), prec) * hellinger_step(vectors[k - 2], vectors[k - 1], prec);
    }
    return IntervalPair{hellinger_step(vectors.front(), vectors.back(), prec),
                        Interval(3 * multiplier, prec) * rhs};
  }, start);
}

namespace {

struct StepPair {
  Interval h;
  Interval n;
};

struct IdentityAcc {
  mpfr_prec_t precision;
  const Rational* w;
  const Rational* nu_root;
  PathCheck check;

  StepPair step(const detail::NodeView& v) {
    return {hellinger_step(v.nu_row, v.mu_row, precision), bhattacharyya_step(v.mu_row, v.nu_row, precision)};
  }
  void leaf(const Word&, const Rational& mu_x, const Rational& nu_x, std::span<const StepPair> path) {
    Interval g(precision);
    Interval norm(Rational(1), precision);
    for (const auto& s : path) {
      g += s.h;
      norm *= s.n;
    }
    const Interval mu_i(mu_x, precision);
    const Interval lhs = mu_i * sqrt(Interval(*w, precision)) * exp(Interval(Rational(1, 2), precision) * g);
    const Interval rhs = sqrt(mu_i * Interval(nu_x / *nu_root, precision)) / norm;
    ++check.paths;
    if (lhs.certainly_le(rhs)) {
      ++check.holds;
    } else if (lhs.certainly_gt(rhs)) {
      ++check.fails;
    } else {
      ++check.inconclusive;
    }
  }
  void merge(IdentityAcc&& o) {
    check.paths += o.check.paths;
    check.holds += o.check.holds;
    check.fails += o.check.fails;
    check.inconclusive += o.check.inconclusive;
  }
};

}  // namespace

PathCheck product_identity_check(const Environment& nu, const Environment& mu, std::size_t n, const Rational& w,
                                 mpfr_prec_t start) {
  check_dominance(nu, mu, n, w);
  const Rational nu_root = nu.eval(std::span<const Symbol>{});
  for (mpfr_prec_t prec = start;; prec *= 2) {
    auto acc = detail::walk_paths<IdentityAcc>(nu, mu, n, [&] { return IdentityAcc{prec, &w, &nu_root, {}}; });
    PathCheck c = acc.check;
    c.precision = prec;
    c.outcome = c.fails ? Outcome::fails : c.inconclusive ? Outcome::inconclusive : Outcome::holds;
    if (c.outcome != Outcome::inconclusive || prec * 2 > kMaxPrecision) return c;
  }
}

}  // namespace semilab
