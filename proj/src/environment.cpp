#include "semilab/environment.hpp"

#include "semilab/envcore.hpp"
#include "semilab/error.hpp"

#include <numeric>

namespace semilab {

using nlohmann::json;

const char* to_string(MassClass c) noexcept {
  return c == MassClass::measure ? "measure" : "semimeasure";
}

Environment::Environment(std::size_t alphabet) : alphabet_(alphabet) {
  if (alphabet < 2) throw Error(ErrorCode::invalid_argument, "alphabet size must be at least 2");
}

Rational Environment::eval(const Word& x) const {
  if (x.alphabet() != alphabet_) {
    throw Error(ErrorCode::invalid_argument, "word alphabet " + std::to_string(x.alphabet()) +
                                                 " does not match environment alphabet " +
                                                 std::to_string(alphabet_));
  }
  return evaluate(x.symbols());
}

Rational Environment::conditional_impl(std::span<const Symbol> x, Symbol a) const {
  const Rational parent = evaluate(x);
  if (parent == 0) throw Error(ErrorCode::undefined_posterior, "conditional at a zero-mass node");
  std::vector<Symbol> child(x.begin(), x.end());
  child.push_back(a);
  return evaluate(child) / parent;
}

std::optional<Rational> Environment::closed_form_mass(std::size_t) const { return std::nullopt; }

Rational Environment::total_mass(std::size_t n) const {
  if (auto closed = closed_form_mass(n)) return *closed;
  Rational total = 0;
  for_each_support(*this, n, [&](const Word&, const Rational& v) { total += v; });
  return total;
}

Rational SequentialEnvironment::evaluate(std::span<const Symbol> x) const {
  Rational root = root_mass();
  if (x.size() <= 32) {
    for (std::size_t t = 0; t < x.size() && root != 0; ++t) root *= step(x.first(t), x[t]);
    return root;
  }
  std::vector<Rational> factors;
  factors.reserve(x.size() + 1);
  factors.push_back(root);
  for (std::size_t t = 0; t < x.size(); ++t) {
    factors.push_back(step(x.first(t), x[t]));
    if (factors.back() == 0) return 0;
  }
  return product(factors);
}

std::optional<Rational> SequentialEnvironment::closed_form_mass(std::size_t) const {
  if (steps_normalized()) return root_mass();
  return std::nullopt;
}

namespace {

void check_probability(const Rational& p, const char* what) {
  if (p < 0 || p > 1) throw Error(ErrorCode::validation, std::string(what) + " " + to_string(p) + " outside [0,1]");
}

json rational_array(const std::vector<Rational>& v) {
  json out = json::array();
  for (const auto& q : v) out.push_back(to_string(q));
  return out;
}

class Categorical final : public SequentialEnvironment {
 public:
  Categorical(std::vector<Rational> probs, std::string kind)
      : SequentialEnvironment(probs.size()), probs_(std::move(probs)), kind_(std::move(kind)) {
    Rational sum = 0;
    for (const auto& p : probs_) {
      check_probability(p, "probability");
      sum += p;
    }
    if (sum > 1) throw Error(ErrorCode::validation, "categorical probabilities sum to " + to_string(sum) + " > 1");
    normalized_ = sum == 1;
  }

  std::string kind() const override { return kind_; }
  MassClass declared_class() const override { return normalized_ ? MassClass::measure : MassClass::semimeasure; }

  json to_json() const override {
    if (kind_ == "bernoulli") return {{"kind", "bernoulli"}, {"p", to_string(probs_[1])}};
    if (kind_ == "uniform") return {{"kind", "uniform"}, {"alphabet", alphabet()}};
    return {{"kind", "categorical"}, {"probs", rational_array(probs_)}};
  }

 protected:
  Rational step(std::span<const Symbol>, Symbol a) const override { return probs_[a]; }
  bool steps_normalized() const override { return normalized_; }

 private:
  std::vector<Rational> probs_;
  std::string kind_;
  bool normalized_ = false;
};

class Markov final : public SequentialEnvironment {
 public:
  Markov(std::size_t alphabet, std::size_t order, std::map<Word, std::vector<Rational>> rows, Symbol start)
      : SequentialEnvironment(alphabet), order_(order), rows_(std::move(rows)), start_(start) {
    if (start >= alphabet) throw Error(ErrorCode::validation, "markov start symbol outside alphabet");
    std::size_t contexts = 1;
    for (std::size_t i = 0; i < order; ++i) contexts *= alphabet;
    if (rows_.size() != contexts) {
      throw Error(ErrorCode::validation, "markov chain of order " + std::to_string(order) + " needs " +
                                             std::to_string(contexts) + " rows, got " + std::to_string(rows_.size()));
    }
    normalized_ = true;
    for (const auto& [context, row] : rows_) {
      if (context.size() != order || context.alphabet() != alphabet || row.size() != alphabet) {
        throw Error(ErrorCode::validation, "malformed markov row for context '" + context.str() + "'");
      }
      Rational sum = 0;
      for (const auto& p : row) {
        check_probability(p, "transition");
        sum += p;
      }
      if (sum > 1) throw Error(ErrorCode::validation, "markov row '" + context.str() + "' sums above 1");
      normalized_ = normalized_ && sum == 1;
    }
  }

  std::string kind() const override { return "markov"; }
  MassClass declared_class() const override { return normalized_ ? MassClass::measure : MassClass::semimeasure; }

  json to_json() const override {
    json rows = json::object();
    for (const auto& [context, row] : rows_) rows[context.str()] = rational_array(row);
    return {{"kind", "markov"}, {"alphabet", alphabet()}, {"order", order_}, {"start", start_}, {"rows", rows}};
  }

 protected:
  Rational step(std::span<const Symbol> history, Symbol a) const override {
    std::vector<Symbol> ctx(order_, start_);
    const std::size_t have = std::min(order_, history.size());
    std::copy(history.end() - static_cast<std::ptrdiff_t>(have), history.end(),
              ctx.end() - static_cast<std::ptrdiff_t>(have));
    return rows_.at(Word(alphabet(), std::move(ctx)))[a];
  }
  bool steps_normalized() const override { return normalized_; }

 private:
  std::size_t order_;
  std::map<Word, std::vector<Rational>> rows_;
  Symbol start_;
  bool normalized_ = false;
};

class Decaying final : public SequentialEnvironment {
 public:
  explicit Decaying(unsigned beta) : SequentialEnvironment(2), beta_(beta) {
    if (beta < 2) throw Error(ErrorCode::validation, "decaying environment needs beta >= 2");
  }

  std::string kind() const override { return "decaying"; }
  MassClass declared_class() const override { return MassClass::measure; }
  json to_json() const override { return {{"kind", "decaying"}, {"beta", beta_}}; }

 protected:
  Rational step(std::span<const Symbol> history, Symbol a) const override {
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), history.size() + 1, beta_);
    den *= 2;
    Rational one(1, den);
    one.canonicalize();
    return a == 1 ? one : Rational(1 - one);
  }
  bool steps_normalized() const override { return true; }

 private:
  unsigned beta_;
};

class Deterministic final : public Environment {
 public:
  Deterministic(Word prefix, Word cycle)
      : Environment(prefix.alphabet()), prefix_(std::move(prefix)), cycle_(std::move(cycle)) {
    if (cycle_.empty()) throw Error(ErrorCode::validation, "deterministic target needs a nonempty cycle");
    if (cycle_.alphabet() != prefix_.alphabet()) throw Error(ErrorCode::validation, "prefix/cycle alphabet mismatch");
  }

  std::string kind() const override { return "deterministic"; }
  MassClass declared_class() const override { return MassClass::measure; }
  bool zero_absorbing() const override { return true; }

  json to_json() const override {
    return {{"kind", "deterministic"}, {"alphabet", alphabet()}, {"prefix", prefix_.str()}, {"cycle", cycle_.str()}};
  }

  Symbol target(std::size_t i) const {
    return i < prefix_.size() ? prefix_[i] : cycle_[(i - prefix_.size()) % cycle_.size()];
  }

 protected:
  Rational evaluate(std::span<const Symbol> x) const override {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != target(i)) return 0;
    }
    return 1;
  }
  Rational conditional_impl(std::span<const Symbol> x, Symbol a) const override {
    return a == target(x.size()) ? 1 : 0;
  }
  std::optional<Rational> closed_form_mass(std::size_t) const override { return Rational(1); }

 private:
  Word prefix_;
  Word cycle_;
};

class Leaky final : public Environment {
 public:
  Leaky(EnvPtr base, Rational leak) : Environment(base->alphabet()), base_(std::move(base)), leak_(std::move(leak)) {
    check_probability(leak_, "leak");
  }

  std::string kind() const override { return "leaky"; }
  MassClass declared_class() const override {
    return leak_ == 0 ? base_->declared_class() : MassClass::semimeasure;
  }
  bool zero_absorbing() const override { return base_->zero_absorbing(); }
  std::optional<std::size_t> depth_limit() const override { return base_->depth_limit(); }

  json to_json() const override { return {{"kind", "leaky"}, {"leak", to_string(leak_)}, {"base", base_->to_json()}}; }

 protected:
  Rational evaluate(std::span<const Symbol> x) const override {
    return pow(Rational(1 - leak_), x.size()) * base_->eval(x);
  }
  Rational conditional_impl(std::span<const Symbol> x, Symbol a) const override {
    return (1 - leak_) * base_->conditional(x, a);
  }
  std::optional<Rational> closed_form_mass(std::size_t n) const override {
    return pow(Rational(1 - leak_), n) * base_->total_mass(n);
  }

 private:
  EnvPtr base_;
  Rational leak_;
};

class Scaled final : public Environment {
 public:
  Scaled(EnvPtr base, Rational c) : Environment(base->alphabet()), base_(std::move(base)), c_(std::move(c)) {
    if (c_ <= 0 || c_ > 1) throw Error(ErrorCode::validation, "scale factor must lie in (0,1]");
  }

  std::string kind() const override { return "derived"; }
  MassClass declared_class() const override {
    return c_ == 1 ? base_->declared_class() : MassClass::semimeasure;
  }
  bool zero_absorbing() const override { return base_->zero_absorbing(); }
  std::optional<std::size_t> depth_limit() const override { return base_->depth_limit(); }

  json to_json() const override {
    return {{"kind", "derived"}, {"op", "scaled"}, {"c", to_string(c_)}, {"base", base_->to_json()}};
  }

 protected:
  Rational evaluate(std::span<const Symbol> x) const override { return c_ * base_->eval(x); }
  Rational conditional_impl(std::span<const Symbol> x, Symbol a) const override { return base_->conditional(x, a); }
  std::optional<Rational> closed_form_mass(std::size_t n) const override { return c_ * base_->total_mass(n); }

 private:
  EnvPtr base_;
  Rational c_;
};

class Normalized final : public Environment {
 public:
  explicit Normalized(EnvPtr base) : Environment(base->alphabet()), base_(std::move(base)) {
    root_ = base_->eval(std::span<const Symbol>{});
    if (root_ == 0) throw Error(ErrorCode::normalization, "cannot normalize an environment with zero total mass");
  }

  std::string kind() const override { return "derived"; }
  MassClass declared_class() const override {
    // The base may itself be a scaled measure; validation decides.
    return base_->declared_class();
  }
  bool zero_absorbing() const override { return base_->zero_absorbing(); }
  std::optional<std::size_t> depth_limit() const override { return base_->depth_limit(); }
  json to_json() const override { return {{"kind", "derived"}, {"op", "normalize"}, {"base", base_->to_json()}}; }

 protected:
  Rational evaluate(std::span<const Symbol> x) const override { return base_->eval(x) / root_; }
  Rational conditional_impl(std::span<const Symbol> x, Symbol a) const override { return base_->conditional(x, a); }
  std::optional<Rational> closed_form_mass(std::size_t n) const override { return base_->total_mass(n) / root_; }

 private:
  EnvPtr base_;
  Rational root_;
};

class Table final : public Environment {
 public:
  Table(std::size_t alphabet, std::size_t depth, std::map<Word, Rational> values, TailPolicy tail, std::string origin)
      : Environment(alphabet), depth_(depth), tail_(tail), origin_(std::move(origin)) {
    for (auto& [w, v] : values) {
      if (w.alphabet() != alphabet) throw Error(ErrorCode::validation, "table word over wrong alphabet");
      if (w.size() > depth) {
        throw Error(ErrorCode::validation, "table entry '" + w.str() + "' deeper than declared depth");
      }
      if (v != 0) values_.emplace(w, v);
    }
  }

  std::string kind() const override { return origin_.empty() ? "table" : "derived"; }
  MassClass declared_class() const override {
    // Tables make no structural promise; callers validate.
    return MassClass::semimeasure;
  }
  std::optional<std::size_t> depth_limit() const override {
    return tail_ == TailPolicy::error ? std::optional<std::size_t>(depth_) : std::nullopt;
  }

  json to_json() const override {
    json values = json::object();
    for (const auto& [w, v] : values_) values[w.str()] = to_string(v);
    json table = {{"kind", "table"},
                  {"alphabet", alphabet()},
                  {"depth", depth_},
                  {"beyond", tail_ == TailPolicy::error ? "error" : "zero"},
                  {"values", values}};
    if (origin_.empty()) return table;
    return {{"kind", "derived"}, {"op", "materialized"}, {"origin", origin_}, {"table", table}};
  }

 protected:
  Rational evaluate(std::span<const Symbol> x) const override {
    if (x.size() > depth_) {
      if (tail_ == TailPolicy::zero) return 0;
      throw Error(ErrorCode::depth_exceeded, "table of depth " + std::to_string(depth_) + " queried at length " +
                                                 std::to_string(x.size()));
    }
    auto it = values_.find(Word(alphabet(), std::vector<Symbol>(x.begin(), x.end())));
    return it == values_.end() ? Rational(0) : it->second;
  }

 private:
  std::size_t depth_;
  TailPolicy tail_;
  std::string origin_;
  std::map<Word, Rational> values_;
};

}  // namespace

EnvPtr make_uniform(std::size_t alphabet) {
  if (alphabet < 2) throw Error(ErrorCode::validation, "alphabet size must be at least 2");
  return std::make_shared<Categorical>(std::vector<Rational>(alphabet, Rational(1, alphabet)), "uniform");
}

EnvPtr make_bernoulli(const Rational& p) {
  check_probability(p, "bernoulli p");
  return std::make_shared<Categorical>(std::vector<Rational>{1 - p, p}, "bernoulli");
}

EnvPtr make_categorical(std::vector<Rational> probs) {
  if (probs.size() < 2) throw Error(ErrorCode::validation, "categorical needs at least two symbols");
  return std::make_shared<Categorical>(std::move(probs), "categorical");
}

EnvPtr make_markov(std::size_t alphabet, std::size_t order, std::map<Word, std::vector<Rational>> rows,
                   Symbol start) {
  return std::make_shared<Markov>(alphabet, order, std::move(rows), start);
}

EnvPtr make_deterministic(const Word& prefix, const Word& cycle) {
  return std::make_shared<Deterministic>(prefix, cycle);
}

EnvPtr make_leaky(EnvPtr base, const Rational& leak) { return std::make_shared<Leaky>(std::move(base), leak); }

EnvPtr make_decaying(unsigned beta) { return std::make_shared<Decaying>(beta); }

EnvPtr make_table(std::size_t alphabet, std::size_t depth, std::map<Word, Rational> values, TailPolicy tail) {
  return std::make_shared<Table>(alphabet, depth, std::move(values), tail, "");
}

EnvPtr make_scaled(EnvPtr base, const Rational& c) { return std::make_shared<Scaled>(std::move(base), c); }

EnvPtr make_normalized(EnvPtr base) { return std::make_shared<Normalized>(std::move(base)); }

EnvPtr materialize(const Environment& source, std::size_t depth, const std::string& origin) {
  std::map<Word, Rational> values;
  Word x(source.alphabet());
  std::function<void()> walk = [&] {
    const Rational v = source.eval(x);
    if (v != 0) values.emplace(x, v);
    if (x.size() == depth || (v == 0 && source.zero_absorbing())) return;
    for (Symbol a = 0; a < source.alphabet(); ++a) {
      x.push_back(a);
      walk();
      x.pop_back();
    }
  };
  walk();
  return std::make_shared<Table>(source.alphabet(), depth, std::move(values), TailPolicy::zero,
                                 origin.empty() ? std::string("snapshot") : origin);
}

}  // namespace semilab
