#include "semilab/experiments.hpp"

#include "semilab/counterexample.hpp"
#include "semilab/divergence.hpp"
#include "semilab/envcore.hpp"
#include "semilab/error.hpp"
#include "semilab/parallel.hpp"
#include "semilab/randomness.hpp"
#include "semilab/spec.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

namespace semilab {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

const char* artifact_version() noexcept { return "0.3.0"; }

const char* to_string(OutputFormat f) noexcept {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::plotdata: return "plotdata";
  }
  return "csv";
}

OutputFormat parse_output_format(std::string_view text) {
  for (auto f : {OutputFormat::csv, OutputFormat::json, OutputFormat::plotdata}) {
    if (text == to_string(f)) return f;
  }
  throw Error(ErrorCode::invalid_argument, "unknown format '" + std::string(text) + "'");
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// ---------------------------------------------------------------- output

/// A rectangular result with optional (t, lo, hi) series for plot data.
struct Table {
  struct Series {
    std::string title;
    std::size_t t, lo, hi;
  };

  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  std::vector<Series> series;

  void add(std::vector<json> row) { rows.push_back(std::move(row)); }
};

std::string cell_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string csv_text(const Table& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
    out << '\n';
  }
  return out.str();
}

std::string json_text(const Table& t) {
  ojson rows = ojson::array();
  for (const auto& row : t.rows) {
    ojson obj = ojson::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = ojson::parse(row[i].dump());
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

std::string plot_text(const Table& t) {
  std::ostringstream out;
  for (std::size_t s = 0; s < t.series.size(); ++s) {
    const auto& series = t.series[s];
    if (s) out << "\n\n";
    out << "# " << series.title << "\n# t value_lo value_hi\n";
    for (const auto& row : t.rows) {
      out << cell_text(row[series.t]) << ' ' << cell_text(row[series.lo]) << ' ' << cell_text(row[series.hi]) << '\n';
    }
  }
  return out.str();
}

std::string json_doc(const json& j) { return j.dump(2) + "\n"; }

json rational_cell(const Rational& q) { return to_string(q); }

/// Decimal enclosure of q, for plot columns.
std::pair<json, json> decimal_cells(const Rational& q) {
  const Interval x(q, 64);
  return {x.lo_string(), x.hi_string()};
}

// ---------------------------------------------------------------- context

struct Run {
  const ExperimentConfig& cfg;
  std::size_t n;
  mpfr_prec_t prec;
  ParseOptions options;
  std::vector<Verdict> verdicts;
  std::map<std::string, std::string> artifacts;
  json report = json::object();

  const json& spec() const { return cfg.spec; }

  void emit(const Table& t) {
    switch (cfg.format) {
      case OutputFormat::csv: artifacts[t.name + ".csv"] = csv_text(t); break;
      case OutputFormat::json: artifacts[t.name + ".json"] = json_text(t); break;
      case OutputFormat::plotdata:
        if (t.series.empty()) {
          artifacts[t.name + ".csv"] = csv_text(t);
        } else {
          artifacts[t.name + ".dat"] = plot_text(t);
        }
        break;
    }
  }

  void add(Verdict v) { verdicts.push_back(std::move(v)); }
};

/// Prefixes the JSON path of a spec error with the key it was read from.
[[noreturn]] void rethrow_under(const Error& e, const std::string& key) {
  std::string m = e.what();
  if (m.starts_with("at /")) {
    std::string rest = m.substr(3);
    m = "at /" + key + (rest.starts_with("/:") ? rest.substr(1) : rest);
  } else {
    m = "at /" + key + ": " + m;
  }
  throw Error(e.code(), m);
}

template <class F>
auto under(const std::string& key, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    rethrow_under(e, key);
  }
}

const json& need(const Run& r, const std::string& key) {
  auto it = r.spec().find(key);
  if (it == r.spec().end()) throw Error(ErrorCode::parse, "at /" + key + ": experiment spec lacks '" + key + "'");
  return *it;
}

EnvPtr env_at(const Run& r, const std::string& key) {
  const json& v = need(r, key);
  return under(key, [&] { return v.is_array() ? EnvPtr(parse_mixture(v, r.options)) : parse_env(v, r.options); });
}

MixturePtr mixture_at(const Run& r, const std::string& key) {
  const json& v = need(r, key);
  return under(key, [&] { return parse_mixture(v, r.options); });
}

ClassSpec class_at(const Run& r, const std::string& key) {
  const json& v = need(r, key);
  return under(key, [&] { return parse_class(v, r.options); });
}

Rational rational_at(const Run& r, const std::string& key, std::optional<Rational> fallback = std::nullopt) {
  auto it = r.spec().find(key);
  if (it == r.spec().end()) {
    if (fallback) return *fallback;
    need(r, key);
  }
  return json_rational(*it, "/" + key);
}

std::vector<Rational> rationals_at(const Run& r, const std::string& key, std::vector<Rational> fallback) {
  auto it = r.spec().find(key);
  if (it == r.spec().end()) return fallback;
  if (!it->is_array()) throw Error(ErrorCode::parse, "at /" + key + ": expected an array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < it->size(); ++i) out.push_back(json_rational((*it)[i], "/" + key + "/" + std::to_string(i)));
  return out;
}

std::size_t size_at(const Run& r, const std::string& key, std::size_t fallback) {
  auto it = r.spec().find(key);
  if (it == r.spec().end()) return fallback;
  if (!it->is_number_unsigned()) throw Error(ErrorCode::parse, "at /" + key + ": expected a nonnegative integer");
  return it->get<std::size_t>();
}

std::string string_at(const Run& r, const std::string& key, const std::string& fallback) {
  auto it = r.spec().find(key);
  if (it == r.spec().end()) return fallback;
  if (!it->is_string()) throw Error(ErrorCode::parse, "at /" + key + ": expected a string");
  return it->get<std::string>();
}

std::uint64_t need_seed(const Run& r, const std::string& what) {
  if (!r.cfg.seed) throw Error(ErrorCode::invalid_argument, what + " samples at random; pass --seed");
  return *r.cfg.seed;
}

/// Independent seed for item `index` of stream `stream`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return CounterRng(CounterRng(seed).at(stream)).at(index);
}

StageRule stage_rule_at(const Run& r) {
  const std::string s = string_at(r, "stage_rule", "exact");
  if (s == "exact") return StageRule::exact;
  if (s == "partial-sum" || s == "partial_sum") return StageRule::partial_sum;
  throw Error(ErrorCode::parse, "at /stage_rule: expected \"exact\" or \"partial-sum\"");
}

Verdict check(const std::string& label, bool ok, mpfr_prec_t prec) {
  return compare_le_exact(label, ok ? 0 : 1, 0, prec);
}

/// Outcome counts over many verdicts of one kind.
struct Tally {
  std::size_t holds = 0, fails = 0, inconclusive = 0;
  std::optional<Verdict> witness;

  void add(const Verdict& v) {
    switch (v.outcome) {
      case Outcome::holds: ++holds; break;
      case Outcome::fails: ++fails; break;
      case Outcome::inconclusive: ++inconclusive; break;
    }
    const bool worse = !witness || (v.outcome == Outcome::fails && witness->outcome != Outcome::fails) ||
                       (v.outcome == Outcome::inconclusive && witness->outcome == Outcome::holds);
    if (worse) witness = v;
  }

  std::size_t total() const { return holds + fails + inconclusive; }

  json to_json() const {
    return {{"trials", total()}, {"holds", holds}, {"fails", fails}, {"inconclusive", inconclusive}};
  }

  /// One verdict standing for all trials; its sides are those of the worst
  /// trial.
  Verdict summary(const std::string& label, mpfr_prec_t prec) const {
    Verdict v = witness ? *witness : check(label, true, prec);
    v.label = label + " [" + std::to_string(holds) + "/" + std::to_string(total()) + " hold]";
    v.outcome = fails ? Outcome::fails : inconclusive ? Outcome::inconclusive : Outcome::holds;
    return v;
  }
};

/// Integer in [0, bound) from a counter stream.
std::uint64_t draw(const CounterRng& rng, std::uint64_t& counter, std::uint64_t bound) {
  return rng.at(counter++) % bound;
}

// ---------------------------------------------------------------- hellinger

std::pair<Row, Row> random_rows(std::uint64_t seed) {
  const CounterRng rng(seed);
  std::uint64_t c = 0;
  const std::size_t d = 2 + draw(rng, c, 3);
  std::vector<Integer> a(d), b(d);
  Integer sa = 0, sb = draw(rng, c, 17);
  for (std::size_t i = 0; i < d; ++i) {
    a[i] = static_cast<unsigned long>(draw(rng, c, 17));
    b[i] = static_cast<unsigned long>(draw(rng, c, 17));
    sa += a[i];
    sb += b[i];
  }
  if (sa == 0) {
    a[0] = 1;
    sa = 1;
  }
  Row p(d), q(d);
  for (std::size_t i = 0; i < d; ++i) {
    p[i] = Rational(a[i], sa);
    p[i].canonicalize();
    q[i] = sb == 0 ? Rational(0) : Rational(b[i], sb);
    q[i].canonicalize();
  }
  return {std::move(p), std::move(q)};
}

Table trace_table(const HellingerTrace& trace) {
  Table t{"trace",
          {"t", "h_lo", "h_hi", "cum_lo", "cum_hi", "ratio_num", "ratio_den", "maxdiff_num", "maxdiff_den"},
          {},
          {{"cumulative hellinger sum", 0, 3, 4}, {"hellinger step", 0, 1, 2}}};
  for (const auto& s : trace.steps) {
    t.add({s.t, s.h.lo_string(), s.h.hi_string(), s.cumulative.lo_string(), s.cumulative.hi_string(),
           s.ratio.get_num().get_str(), s.ratio.get_den().get_str(), s.max_diff.get_num().get_str(),
           s.max_diff.get_den().get_str()});
  }
  return t;
}

void run_expected_bounds(Run& r) {
  const auto nu = env_at(r, "nu");
  const auto mu = env_at(r, "mu");
  const Rational w = rational_at(r, "w");
  for (auto& v : hellinger_bound_chain(*nu, *mu, r.n, w, r.prec)) r.add(std::move(v));
  for (const auto& kappa : rationals_at(r, "kappas", {})) r.add(kappa_bound(*nu, *mu, r.n, w, kappa, r.prec));

  if (r.spec().value("product_identity", false)) {
    const PathCheck c = product_identity_check(*nu, *mu, r.n, w, r.prec);
    Verdict v = compare_le_exact("per-path product identity", Rational(c.paths - c.holds), 0, c.precision);
    v.label += " [" + std::to_string(c.holds) + "/" + std::to_string(c.paths) + " paths hold]";
    v.outcome = c.outcome;
    r.add(std::move(v));
    r.report["product_identity"] = {{"paths", c.paths}, {"holds", c.holds}, {"fails", c.fails},
                                    {"inconclusive", c.inconclusive}, {"precision", c.precision}};
  }

  if (r.cfg.seed) {
    const Word omega = sample(*mu, r.n, *r.cfg.seed).word;
    r.report["omega"] = omega.str();
    r.emit(trace_table(hellinger_trace(*nu, *mu, omega, r.n, r.prec)));
  }
  r.report["n"] = r.n;
  r.report["w"] = to_string(w);
}

void run_row_trials(Run& r, std::size_t trials) {
  const std::uint64_t seed = need_seed(r, "row_trials");
  std::vector<std::size_t> caps;
  for (const auto& c : rationals_at(r, "row_caps", {Rational(static_cast<long>(r.prec))})) {
    if (c.get_den() != 1 || c < 2) throw Error(ErrorCode::parse, "at /row_caps: expected precisions in bits");
    caps.push_back(c.get_num().get_ui());
  }
  Table rows{"rows", {"cap_bits", "trials", "holds", "fails", "inconclusive"}, {}, {}};
  json by_cap = json::array();
  for (std::size_t ci = 0; ci < caps.size(); ++ci) {
    const auto cap = static_cast<mpfr_prec_t>(caps[ci]);
    std::vector<std::vector<Verdict>> results(trials);
    parallel_for(trials, [&](std::size_t i) {
      const auto [p, q] = random_rows(derive_seed(seed, 1, i));
      results[i] = row_inequality(p, q, std::min(r.prec, cap), cap);
    });
    Tally tally;
    for (const auto& pair : results) {
      for (const auto& v : pair) tally.add(v);
    }
    rows.add({caps[ci], trials, tally.holds, tally.fails, tally.inconclusive});
    by_cap.push_back({{"cap_bits", caps[ci]}, {"verdicts", tally.to_json()}});
    if (ci + 1 == caps.size()) r.add(tally.summary("row inequality N <= 1 - h/2 <= exp(-h/2)", cap));
  }
  r.report["rows"] = by_cap;
  r.emit(rows);
}

void run_hellinger(Run& r) {
  const std::size_t trials = size_at(r, "row_trials", 0);
  if (!trials || r.spec().contains("nu")) run_expected_bounds(r);
  if (trials) run_row_trials(r, trials);
}

void run_markov_tail(Run& r) {
  const auto nu = env_at(r, "nu");
  const auto mu = env_at(r, "mu");
  const Rational w = rational_at(r, "w");
  Table t{"tail",
          {"c", "exceed_mass", "inconclusive_mass", "threshold_lo", "threshold_hi", "bound_lo", "bound_hi", "outcome"},
          {},
          {}};
  for (const auto& c : rationals_at(r, "cs", {1, 2, 4})) {
    TailReport rep = markov_tail_check(*nu, *mu, r.n, w, c, r.prec);
    rep.verdict.label += " (c=" + to_string(c) + ")";
    t.add({to_string(c), rational_cell(rep.exceed_mass), rational_cell(rep.inconclusive_mass),
           rep.threshold.lo_string(), rep.threshold.hi_string(), rep.bound.lo_string(), rep.bound.hi_string(),
           to_string(rep.verdict.outcome)});
    r.add(std::move(rep.verdict));
  }
  r.emit(t);
  r.report["n"] = r.n;
  r.report["w"] = to_string(w);
}

// ---------------------------------------------------------------- chain inequality

Row random_vector(const CounterRng& rng, std::uint64_t& counter, std::size_t dim) {
  Row v(dim);
  for (auto& x : v) {
    const auto num = static_cast<long>(draw(rng, counter, 17));
    const auto den = static_cast<long>(1 + draw(rng, counter, 16));
    x = Rational(num, den);
    x.canonicalize();
  }
  return v;
}

std::vector<Row> parse_vectors(const json& v) {
  if (!v.is_array()) throw Error(ErrorCode::parse, "at /vectors: expected an array of rows");
  std::vector<Row> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string path = "/vectors/" + std::to_string(i);
    if (!v[i].is_array()) throw Error(ErrorCode::parse, "at " + path + ": expected an array");
    Row row;
    for (std::size_t j = 0; j < v[i].size(); ++j) row.push_back(json_rational(v[i][j], path + "/" + std::to_string(j)));
    for (const auto& x : row) {
      if (x < 0) throw Error(ErrorCode::validation, "at " + path + ": negative entry");
    }
    out.push_back(std::move(row));
  }
  return out;
}

void run_chain(Run& r) {
  const Rational multiplier = r.cfg.multiplier.value_or(rational_at(r, "multiplier", Rational(1)));
  if (multiplier <= 0) throw Error(ErrorCode::invalid_argument, "multiplier must be positive");
  r.report["multiplier"] = to_string(multiplier);

  if (r.spec().contains("vectors")) {
    const auto vectors = parse_vectors(r.spec()["vectors"]);
    std::optional<Rational> beta;
    if (r.spec().contains("beta")) beta = rational_at(r, "beta");
    r.add(chain_inequality(vectors, beta, multiplier, r.prec));
    return;
  }

  const std::uint64_t seed = need_seed(r, "chain-lemma trials");
  const std::size_t trials = size_at(r, "trials", 1000);
  const std::size_t dim = size_at(r, "dimension", 3);
  const std::size_t max_len = size_at(r, "max_length", 6);
  if (dim == 0 || max_len < 2) throw Error(ErrorCode::invalid_argument, "need dimension >= 1 and max_length >= 2");
  Table t{"chain", {"part", "beta", "trials", "holds", "fails", "inconclusive"}, {}, {}};
  json parts = json::array();

  const auto betas = rationals_at(r, "betas", {Rational(1, 4), Rational(1), Rational(4)});
  for (std::size_t b = 0; b < betas.size(); ++b) {
    std::vector<Verdict> results(trials);
    parallel_for(trials, [&](std::size_t i) {
      const CounterRng rng(derive_seed(seed, 10 + b, i));
      std::uint64_t c = 0;
      std::vector<Row> vectors;
      for (int k = 0; k < 3; ++k) vectors.push_back(random_vector(rng, c, dim));
      results[i] = chain_inequality(vectors, betas[b], multiplier, r.prec);
    });
    Tally tally;
    for (const auto& v : results) tally.add(v);
    t.add({"i", to_string(betas[b]), trials, tally.holds, tally.fails, tally.inconclusive});
    parts.push_back({{"part", "i"}, {"beta", to_string(betas[b])}, {"verdicts", tally.to_json()}});
    r.add(tally.summary("chain part (i), beta=" + to_string(betas[b]), r.prec));
  }

  std::vector<Verdict> results(trials);
  parallel_for(trials, [&](std::size_t i) {
    const CounterRng rng(derive_seed(seed, 2, i));
    std::uint64_t c = 0;
    const std::size_t m = 2 + draw(rng, c, max_len - 1);
    std::vector<Row> vectors;
    for (std::size_t k = 0; k < m; ++k) vectors.push_back(random_vector(rng, c, dim));
    results[i] = chain_inequality(vectors, std::nullopt, multiplier, r.prec);
  });
  Tally tally;
  for (const auto& v : results) tally.add(v);
  t.add({"ii", "", trials, tally.holds, tally.fails, tally.inconclusive});
  parts.push_back({{"part", "ii"}, {"max_length", max_len}, {"verdicts", tally.to_json()}});
  r.add(tally.summary("chain part (ii), m <= " + std::to_string(max_len), r.prec));

  r.emit(t);
  r.report["parts"] = parts;
}

// ---------------------------------------------------------------- quasimeasure

/// Visits every string of length <= depth.
void for_each_node(std::size_t alphabet, std::size_t depth, const std::function<void(const Word&)>& visit) {
  Word x(alphabet);
  std::function<void()> walk = [&] {
    visit(x);
    if (x.size() == depth) return;
    for (Symbol a = 0; a < alphabet; ++a) {
      x.push_back(a);
      walk();
      x.pop_back();
    }
  };
  walk();
}

void run_quasimeasure(Run& r) {
  const auto base = env_at(r, "env");
  const std::size_t cap = size_at(r, "depth_cap", std::max(r.n, kDefaultQuasiDepthCap));
  const auto q = std::make_shared<QuasimeasureEnv>(base, cap);
  Table t{"quasimeasure", {"n", "total_mass", "threshold", "alive"}, {}, {}};
  Rational max_increase;
  bool first = true;
  Rational previous;
  for (std::size_t k = 1; k <= r.n; ++k) {
    const Rational mass = q->base_mass(k);
    t.add({k, rational_cell(mass), rational_cell(1 - Rational(1, static_cast<long>(k))), q->alive(k)});
    if (!first && (mass - previous > max_increase)) max_increase = mass - previous;
    first = false;
    previous = mass;
  }
  r.emit(t);
  r.add(compare_le_exact("total mass T_n nonincreasing (largest step up)", max_increase, 0, r.prec));

  const std::size_t depth = default_cert_depth(base->alphabet(), r.n);
  const auto report = validate(*q, depth);
  r.add(check("transform is a semimeasure to depth " + std::to_string(depth), report.is_semimeasure, r.prec));
  bool below = true;
  for_each_node(base->alphabet(), depth, [&](const Word& x) { below = below && q->eval(x) <= base->eval(x); });
  r.add(check("transform <= base pointwise to depth " + std::to_string(depth), below, r.prec));

  const auto cutoff = q->cutoff(r.n);
  r.report["cutoff"] = cutoff ? json(*cutoff) : json(nullptr);
  r.report["depth_cap"] = cap;
  r.report["env"] = base->to_json();
}

// ---------------------------------------------------------------- W vs D

void run_w_vs_d(Run& r) {
  const auto cs = class_at(r, "class");
  const std::size_t cap = size_at(r, "depth_cap", kDefaultQuasiDepthCap);
  const auto w_mix = std::make_shared<MixtureEnv>(cs.cls, cs.weights, MixtureMode::quasi, std::nullopt, cap);
  const auto d_mix = std::make_shared<MixtureEnv>(cs.cls, cs.weights, MixtureMode::measures_only);
  const auto& cls = *cs.cls;

  Table comps{"components", {"index", "weight", "measure", "cutoff"}, {}, {}};
  bool settles = true;
  std::size_t settle = 0;
  for (std::size_t i = 1; i <= cls.size(); ++i) {
    auto q = std::dynamic_pointer_cast<const QuasimeasureEnv>(w_mix->component(i));
    std::optional<std::size_t> cut;
    if (q) cut = q->cutoff(cap);
    comps.add({i, rational_cell(cs.weights(i)), cls.is_measure(i), cut ? json(*cut) : json("none")});
    if (!cls.is_measure(i)) {
      if (!cut) {
        settles = false;
      } else {
        settle = std::max(settle, *cut);
      }
      if (q && cut && *cut <= r.n) {
        bool zero = true;
        for_each_node(cls.alphabet(), r.n, [&](const Word& x) {
          if (x.size() >= *cut) zero = zero && q->eval(x) == 0;
        });
        r.add(check("quasimeasure of component " + std::to_string(i) + " zero from depth " + std::to_string(*cut) +
                        " to " + std::to_string(r.n),
                    zero, r.prec));
      }
    }
  }
  r.emit(comps);

  bool d_le_w = true, w_le_bound = true, equal_when_none = true;
  std::size_t nodes = 0, none_nodes = 0;
  for_each_node(cls.alphabet(), r.n, [&](const Word& x) {
    ++nodes;
    const Rational wv = w_mix->eval(x);
    const Rational dv = d_mix->eval(x);
    const auto k = k_x(*w_mix, x);
    Rational tail = 0;
    if (k) {
      for (std::size_t i = *k; i <= cls.size(); ++i) {
        if (!cls.is_measure(i)) tail += cs.weights(i) * w_mix->component(i)->eval(x);
      }
    } else {
      ++none_nodes;
      equal_when_none = equal_when_none && wv == dv;
    }
    d_le_w = d_le_w && dv <= wv;
    w_le_bound = w_le_bound && wv <= dv + tail;
  });
  const std::string depth = " to depth " + std::to_string(r.n);
  r.add(check("D <= W" + depth, d_le_w, r.prec));
  r.add(check("W <= D + sum over non-measures from k_x" + depth, w_le_bound, r.prec));
  r.add(check("W = D wherever k_x is none" + depth, equal_when_none, r.prec));
  r.report["nodes"] = nodes;
  r.report["nodes_without_k_x"] = none_nodes;
  r.report["settle_depth"] = settles ? json(settle) : json(nullptr);

  if (r.cfg.seed || r.spec().contains("omega_length") || r.spec().contains("sample_from")) {
    const std::size_t from = size_at(r, "sample_from", cls.first_measure().value_or(0));
    if (from == 0 || from > cls.size() || !cls.is_measure(from)) {
      throw Error(ErrorCode::invalid_argument, "at /sample_from: index must name a measure of the class");
    }
    const std::size_t len = size_at(r, "omega_length", 16);
    const Word omega = sample(*cls[from], len, need_seed(r, "w-vs-d sampling")).word;
    Table gap{"posterior_gap", {"t", "max_diff", "max_diff_lo", "max_diff_hi", "k_x"}, {}, {{"max |W - D| posterior", 0, 2, 3}}};
    bool settled_zero = true;
    for (std::size_t t = 1; t <= len; ++t) {
      const Word x = omega.prefix(t - 1);
      const Rational wx = w_mix->eval(x), dx = d_mix->eval(x);
      if (wx == 0 || dx == 0) throw Error(ErrorCode::undefined_posterior, "mixture vanishes at '" + x.str() + "'");
      Rational diff = 0;
      for (Symbol a = 0; a < cls.alphabet(); ++a) {
        const Word xa = x.extended(a);
        diff = std::max<Rational>(diff, abs(w_mix->eval(xa) / wx - d_mix->eval(xa) / dx));
      }
      const auto k = k_x(*w_mix, x);
      const auto [lo, hi] = decimal_cells(diff);
      gap.add({t, rational_cell(diff), lo, hi, k ? json(*k) : json("none")});
      if (settles && t >= settle + 1) settled_zero = settled_zero && diff == 0;
    }
    r.emit(gap);
    r.report["omega"] = omega.str();
    if (settles) {
      r.add(check("posterior gap |W - D| = 0 for t >= " + std::to_string(settle + 1) + " on sampled omega",
                  settled_zero, r.prec));
    }
  }
}

// ---------------------------------------------------------------- deficiency

Table deficiency_table(const DeficiencyTrace& trace) {
  Table t{"deficiency",
          {"n", "ratio_num", "ratio_den", "log2_lo", "log2_hi", "sup_lo", "sup_hi"},
          {},
          {{"log2 M/mu", 0, 3, 4}, {"running deficiency", 0, 5, 6}}};
  for (const auto& s : trace.steps) {
    t.add({s.n, s.ratio.get_num().get_str(), s.ratio.get_den().get_str(), s.log2_ratio.lo_string(),
           s.log2_ratio.hi_string(), s.sup_log2.lo_string(), s.sup_log2.hi_string()});
  }
  return t;
}

Word omega_at(const Run& r, const Environment& mu, std::size_t length, const std::string& what) {
  if (r.spec().contains("omega")) {
    const std::string text = string_at(r, "omega", "");
    Word w = under("omega", [&] { return Word::parse(text, mu.alphabet()); });
    if (w.size() < length) throw Error(ErrorCode::invalid_argument, "at /omega: shorter than the requested depth");
    return w;
  }
  return sample(mu, length, need_seed(r, what)).word;
}

void run_deficiency(Run& r) {
  const auto reference = env_at(r, "reference");
  const auto mu = env_at(r, "mu");
  std::optional<Rational> ceiling;
  if (r.spec().contains("ceiling")) ceiling = rational_at(r, "ceiling");
  const Word omega = omega_at(r, *mu, r.n, "deficiency without an explicit omega");
  const auto trace = deficiency_trace(*reference, *mu, omega, r.n, r.prec, ceiling);
  bool ok = true;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    ok = ok && trace.steps[k].sup_ratio >= trace.steps[k].ratio;
    if (k) ok = ok && trace.steps[k].sup_ratio >= trace.steps[k - 1].sup_ratio;
  }
  r.add(check("running deficiency nondecreasing and above every prefix ratio", ok, r.prec));
  r.emit(deficiency_table(trace));
  r.report["omega"] = omega.prefix(r.n).str();
  r.report["ceiling"] = to_string(trace.ceiling);
  r.report["diverging"] = trace.diverging;
  r.report["deficiency"] = interval_json(trace.last().sup_log2);
}

// ---------------------------------------------------------------- leftmost alpha

void run_leftmost(Run& r) {
  const auto mix = mixture_at(r, "mixture");
  const StageApproximation stages{mix, stage_rule_at(r)};
  const AlphaSequence seq = leftmost_random(*mix, r.n);
  r.artifacts["alpha.txt"] = seq.alpha.str() + "\n";
  r.artifacts["alpha.json"] = json_doc(seq.sidecar());

  Table t{"alpha_steps", {"n", "symbol", "zero_branch", "prefix_mass", "threshold", "scaled_lo", "scaled_hi"}, {},
          {{"2^n M(alpha_1:n)", 0, 5, 6}}};
  Rational worst = 0;
  for (const auto& s : seq.steps) {
    const Rational scaled = s.prefix_mass * pow2(static_cast<long>(s.n));
    worst = std::max(worst, scaled);
    const auto [lo, hi] = decimal_cells(scaled);
    t.add({s.n, s.symbol, rational_cell(s.zero_branch), rational_cell(s.prefix_mass),
           rational_cell(pow2(-static_cast<long>(s.n))), lo, hi});
  }
  r.emit(t);
  r.add(compare_le_exact("max_n 2^n M(alpha_1:n) <= 1 for n <= " + std::to_string(r.n), worst, 1, r.prec));

  if (stages.rule == StageRule::partial_sum) {
    Table st{"stages", {"t", "alpha_t", "agrees_with_limit"}, {}, {}};
    bool monotone = true;
    std::size_t settled = 1;
    Word previous(2);
    for (std::size_t t = 1; t <= r.n; ++t) {
      const Word a = alpha_stage(stages, t);
      const bool agrees = a == seq.alpha.prefix(t);
      if (!agrees) settled = t + 1;
      if (t > 1) monotone = monotone && previous <= a.prefix(t - 1);
      st.add({t, a.str(), agrees});
      previous = a;
    }
    r.emit(st);
    r.add(check("alpha^t lexicographically nondecreasing in t", monotone, r.prec));
    r.report["stabilization_stage"] = settled;
  }
  r.report["alpha"] = seq.alpha.str();
  r.report["stage_rule"] = to_string(stages.rule);
}

// ---------------------------------------------------------------- e2i

void run_e2i(Run& r) {
  const auto mu = env_at(r, "mu");
  const auto f = under("functional", [&] { return parse_functional(need(r, "functional")); });
  const Rational w = rational_at(r, "weight", Rational(1, 4));

  Table t{"mubar", {"n", "expectation", "eps", "semimeasure", "monotone", "root_value"}, {}, {}};
  Tally hypothesis, semimeasure, monotone;
  EnvPtr previous;
  EnvPtr mubar;
  for (std::size_t k = 1; k <= r.n; ++k) {
    const Rational e = functional_expectation(*mu, *f, k);
    const Rational eps = f->tolerance(k);
    hypothesis.add(compare_le_exact("E[F_n] <= eps_n", e, eps, r.prec));
    mubar = e2i_build_mubar(*mu, *f, k);
    const bool semi = validate(*mubar, k).is_semimeasure;
    bool mono = true;
    if (previous) {
      for_each_node(mu->alphabet(), k, [&](const Word& x) { mono = mono && mubar->eval(x) >= previous->eval(x); });
    }
    semimeasure.add(check("mu-bar_n semimeasure", semi, r.prec));
    monotone.add(check("mu-bar_n >= mu-bar_(n-1)", mono, r.prec));
    t.add({k, rational_cell(e), rational_cell(eps), semi, mono, rational_cell(mubar->eval(Word(mu->alphabet())))});
    previous = mubar;
  }
  r.emit(t);
  const std::string upto = " for n <= " + std::to_string(r.n);
  r.add(hypothesis.summary("E[F_n] <= eps_n" + upto, r.prec));
  r.add(semimeasure.summary("mu-bar_n passes semimeasure validation" + upto, r.prec));
  r.add(monotone.summary("mu-bar_n nondecreasing in n" + upto, r.prec));

  const auto defect = monotonicity_defect(*f, mu->alphabet(), r.n);
  r.report["functional"] = f->to_json();
  r.report["functional_monotone"] = !defect;
  if (defect) r.report["functional_monotonicity_defect"] = defect->str();

  std::vector<EnvPtr> members;
  std::vector<Rational> weights;
  if (r.spec().contains("class")) {
    const auto cs = class_at(r, "class");
    for (std::size_t i = 1; i <= cs.cls->size(); ++i) {
      members.push_back((*cs.cls)[i]);
      weights.push_back(cs.weights(i));
    }
  } else {
    members.push_back(mu);
    weights.push_back(Rational(1, 2));
  }
  members.push_back(mubar);
  weights.push_back(w);
  const auto ext_class = std::make_shared<EnvClass>(std::move(members), r.n);
  const std::size_t index = ext_class->size();
  const MixtureEnv ext(ext_class, WeightScheme::explicit_weights(std::move(weights)), MixtureMode::raw);

  const std::size_t samples = size_at(r, "samples", 100);
  if (samples == 0) return;
  const std::uint64_t seed = need_seed(r, "e2i");
  std::vector<Word> omegas(samples);
  std::vector<std::optional<IndividualBound>> results(samples);
  parallel_for(samples, [&](std::size_t i) {
    omegas[i] = sample(*mu, r.n, derive_seed(seed, 3, i)).word;
    results[i] = e2i_individual_bound(ext, index, *f, *mu, omegas[i], r.n);
  });
  Table ind{"individual", {"sample", "omega", "f_value", "at_n", "with_deficiency"}, {}, {}};
  Tally at_n, with_d;
  for (std::size_t i = 0; i < samples; ++i) {
    at_n.add(results[i]->at_n);
    with_d.add(results[i]->with_deficiency);
    ind.add({i, omegas[i].str(), rational_cell(f->value(omegas[i])), to_string(results[i]->at_n.outcome),
             to_string(results[i]->with_deficiency.outcome)});
  }
  r.emit(ind);
  r.add(at_n.summary("F_n <= eps_n/w * M/mu on sampled omega", r.prec));
  r.add(with_d.summary("F_n <= eps_n/w * 2^d on sampled omega", r.prec));
  r.report["weight"] = to_string(w);
  r.report["samples"] = samples;
}

// ---------------------------------------------------------------- prop8

void run_prop8(Run& r) {
  const auto cs = class_at(r, "class");
  std::vector<std::size_t> k0s;
  if (r.spec().contains("k0")) {
    for (const auto& k : rationals_at(r, "k0", {})) {
      if (k.get_den() != 1 || k < 1) throw Error(ErrorCode::parse, "at /k0: expected positive indices");
      k0s.push_back(k.get_num().get_ui());
    }
  } else if (auto first = cs.cls->first_measure()) {
    k0s.push_back(*first);
  }
  for (std::size_t k0 : k0s) r.add(prop8_expected_bound(cs.cls, cs.weights, k0, r.n, r.prec));

  const std::size_t ratio_depth = size_at(r, "ratio_depth", 8);
  const RatioBoundReport ratio = ratio_bound_check(cs.cls, cs.weights, ratio_depth);
  if (ratio.checked) {
    r.add(compare_le_exact("max delta-hat_(k-1)/delta-hat_k / (1 + eps_k/eps_O) <= 1 to depth " +
                               std::to_string(ratio_depth),
                           ratio.worst, 1, r.prec));
  }
  r.report["ratio_bound"] = {{"checked", ratio.checked}, {"worst", to_string(ratio.worst)}, {"holds", ratio.holds}};
  if (ratio.violation) {
    r.report["ratio_bound"]["violation"] = {{"k", ratio.violation->first}, {"x", ratio.violation->second.str()}};
  }

  if (r.cfg.seed) {
    const std::size_t len = size_at(r, "trace_length", 200);
    for (std::size_t k0 : k0s) {
      const Word omega = sample(*(*cs.cls)[k0], len, derive_seed(*r.cfg.seed, 4, k0)).word;
      const Prop8Report rep = prop8_trace(cs.cls, cs.weights, k0, omega, len, r.prec);
      Table t{"prop8_k" + std::to_string(k0),
              {"t", "sum_h_mu_lo", "sum_h_mu_hi", "sum_h_d_lo", "sum_h_d_hi", "deficiency_lo", "deficiency_hi"},
              {},
              {{"sum h(delta-hat_k0, mu)", 0, 1, 2}, {"sum h(delta-hat_k0, D-hat)", 0, 3, 4}, {"deficiency", 0, 5, 6}}};
      for (std::size_t i = 0; i < rep.sum_h_mu.size(); ++i) {
        const auto& d = rep.deficiency.steps[i + 1].sup_log2;
        t.add({i + 1, rep.sum_h_mu[i].lo_string(), rep.sum_h_mu[i].hi_string(), rep.sum_h_d[i].lo_string(),
               rep.sum_h_d[i].hi_string(), d.lo_string(), d.hi_string()});
      }
      r.emit(t);
      r.report["omega_k" + std::to_string(k0)] = omega.str();
    }
  }
  r.report["k0"] = k0s;
}

// ---------------------------------------------------------------- counterexample

void run_counterexample(Run& r) {
  const auto cs = class_at(r, "class");
  const Rational gamma = rational_at(r, "gamma", Rational(1, 9));
  const std::size_t t_max = size_at(r, "t_max", 48);
  const std::size_t margin = size_at(r, "margin", 16);
  const auto mix = std::make_shared<MixtureEnv>(cs.cls, cs.weights, MixtureMode::raw);
  const StageApproximation stages{mix, stage_rule_at(r)};
  const NuLimit lim = nu_limit(stages, t_max, margin);
  const std::size_t nu_depth = t_max - margin;
  const std::size_t horizon = std::min(r.cfg.depth.value_or(size_at(r, "horizon", nu_depth - 1)), nu_depth - 1);
  const ContaminatedMixture cm = build_mprime(lim.env, mix, gamma);

  const auto rep = verify_nonconvergence(cm, horizon);
  for (const auto& p : rep.positions) {
    const std::string at = " (n=" + std::to_string(p.n) + ")";
    r.add(check("nu(alpha_<n) = nu(alpha_1:n)" + at, p.nu_equal, r.prec));
    r.add(compare_le_exact("2^-(n+1) <= nu(alpha_1:n)" + at, pow2(-static_cast<long>(p.n) - 1), p.nu_at, r.prec));
    r.add(compare_le_exact("(1-g)/(1+3g) <= M'(alpha_n|alpha_<n)" + at, p.bound, p.posterior, r.prec));
  }
  r.add(check("(1-g)/(1+3g) > 1/2", (1 - gamma) / (1 + 3 * gamma) > Rational(1, 2), r.prec));

  const std::size_t check_depth = std::min<std::size_t>(default_cert_depth(2, horizon), nu_depth);
  r.add(check("nu is a semimeasure to depth " + std::to_string(check_depth), validate(*lim.env, check_depth).is_semimeasure,
              r.prec));
  const auto defect = universality_defect(cm, check_depth);
  r.add(check("M' >= gamma eps_i nu_i to depth " + std::to_string(check_depth), !defect, r.prec));
  r.add(check("M(alpha_1:n) <= 2^-n for n <= " + std::to_string(horizon), leftmost_random(*mix, horizon).bound_holds,
              r.prec));

  Table t{"positions", {"n", "nu_before", "nu_at", "mprime_posterior", "gap", "bound", "certified"}, {}, {}};
  for (const auto& p : rep.positions) {
    t.add({p.n, rational_cell(p.nu_before), rational_cell(p.nu_at), rational_cell(p.posterior),
           rational_cell(p.posterior - Rational(1, 2)), rational_cell(p.bound), p.certified});
  }
  r.emit(t);
  r.report = rep.to_json(class_to_json(*cs.cls, cs.weights));
  r.report["stage_rule"] = to_string(stages.rule);
  r.report["stabilization_stage"] = lim.stabilization_stage;
  r.report["limit"] = lim.env->to_json();
  r.report["nu_depth"] = nu_depth;
}

// ---------------------------------------------------------------- dispatch

struct Command {
  std::string name;
  std::size_t default_depth;
  void (*run)(Run&);
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"verify-hellinger-bounds", 10, run_hellinger},
      {"markov-tail", 10, run_markov_tail},
      {"chain-lemma", 0, run_chain},
      {"quasimeasure", 8, run_quasimeasure},
      {"w-vs-d", 8, run_w_vs_d},
      {"deficiency", 32, run_deficiency},
      {"leftmost-alpha", 64, run_leftmost},
      {"e2i", 10, run_e2i},
      {"prop8", 10, run_prop8},
      {"counterexample", 0, run_counterexample},
  };
  return table;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : commands()) out.push_back(c.name);
    return out;
  }();
  return names;
}

RunResult run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  auto it = std::find_if(commands().begin(), commands().end(),
                         [&](const Command& c) { return c.name == config.subcommand; });
  if (it == commands().end()) throw Error(ErrorCode::invalid_argument, "unknown subcommand '" + config.subcommand + "'");
  if (!config.spec.is_object()) throw Error(ErrorCode::parse, "at /: experiment spec must be a JSON object");
  if (config.precision < 2 || config.precision > kMaxPrecision) {
    throw Error(ErrorCode::invalid_argument, "precision must lie in [2, " + std::to_string(kMaxPrecision) + "] bits");
  }

  Run run{config, config.depth.value_or(0), config.precision, {}, {}, {}, json::object()};
  if (!config.depth) {
    run.n = it->default_depth;
    if (auto d = config.spec.find("depth"); d != config.spec.end()) {
      if (!d->is_number_unsigned()) throw Error(ErrorCode::parse, "at /depth: expected a nonnegative integer");
      run.n = d->get<std::size_t>();
    }
  }
  if (it->default_depth && run.n == 0) throw Error(ErrorCode::invalid_argument, "depth must be at least 1");
  run.options.cert_depth = run.n ? run.n : 8;
  it->run(run);

  RunResult result;
  result.outcome = combine(run.verdicts);
  json verdicts = json::array();
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& v : run.verdicts) {
    verdicts.push_back(v.to_json());
    ++counts[static_cast<int>(v.outcome)];
  }
  const json count_json = {{"holds", counts[0]}, {"fails", counts[1]}, {"inconclusive", counts[2]}};
  run.artifacts["verdicts.json"] = json_doc({{"subcommand", config.subcommand},
                                             {"outcome", to_string(result.outcome)},
                                             {"counts", count_json},
                                             {"verdicts", verdicts}});
  if (!run.report.empty()) run.artifacts["report.json"] = json_doc(run.report);

  const json identity = {{"subcommand", config.subcommand},
                         {"spec", config.spec},
                         {"depth", run.n},
                         {"precision", config.precision},
                         {"seed", config.seed ? json(*config.seed) : json(nullptr)},
                         {"format", to_string(config.format)},
                         {"multiplier", config.multiplier ? json(to_string(*config.multiplier)) : json(nullptr)}};
  json names = json::array();
  for (const auto& [name, _] : run.artifacts) names.push_back(name);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  result.manifest = {{"artifact_version", artifact_version()},
                     {"subcommand", config.subcommand},
                     {"spec_hash", hex64(fnv1a(identity.dump()))},
                     {"config", identity},
                     {"timings", {{"total_ms", ms}, {"workers", workers()}}},
                     {"summary", {{"outcome", to_string(result.outcome)}, {"counts", count_json},
                                  {"exit_code", exit_code(result.outcome)}}},
                     {"artifacts", names}};
  result.verdicts = std::move(run.verdicts);
  result.artifacts = std::move(run.artifacts);
  return result;
}

}  // namespace semilab
