#include "semilab/spec.hpp"

#include "semilab/envcore.hpp"
#include "semilab/error.hpp"

#include <fstream>
#include <sstream>

namespace semilab {

using nlohmann::json;

namespace {

constexpr std::string_view kAt = "at ";

[[noreturn]] void fail(ErrorCode code, const std::string& path, const std::string& message) {
  throw Error(code, std::string(kAt) + (path.empty() ? "/" : path) + ": " + message);
}

/// Runs `body`, attaching `path` to errors that do not carry one yet.
template <class F>
auto at_path(const std::string& path, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with(kAt)) throw;
    fail(e.code(), path, e.what());
  }
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(ErrorCode::parse, path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::parse, path, "missing field '" + key + "'");
  return *it;
}

std::size_t json_size(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(ErrorCode::parse, path, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::size_t size_field(const json& obj, const std::string& key, const std::string& path, std::size_t fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : json_size(*it, path + "/" + key);
}

std::string string_field(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) fail(ErrorCode::parse, path + "/" + key, "expected a string");
  return v.get<std::string>();
}

Rational rational_field(const json& obj, const std::string& key, const std::string& path) {
  return json_rational(field(obj, key, path), path + "/" + key);
}

std::vector<Rational> rational_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(ErrorCode::parse, path, "expected an array of rationals");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(json_rational(v[i], path + "/" + std::to_string(i)));
  return out;
}

Word word_field(const json& obj, const std::string& key, const std::string& path, std::size_t alphabet) {
  const std::string text = obj.contains(key) ? string_field(obj, key, path) : std::string();
  return at_path(path + "/" + key, [&] { return Word::parse(text, alphabet); });
}

EnvPtr parse_env_at(const json& spec, const std::string& path, const ParseOptions& options);
MixturePtr parse_mixture_at(const json& spec, const std::string& path, const ParseOptions& options);

ClassSpec parse_class_at(const json& spec, const std::string& path, const ParseOptions& options) {
  if (!spec.is_array() || spec.empty()) fail(ErrorCode::parse, path, "class must be a nonempty array");
  std::vector<EnvPtr> members;
  std::vector<Rational> weights;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    const json& entry = spec[i];
    if (entry.is_object() && entry.contains("env")) {
      members.push_back(parse_env_at(entry["env"], p + "/env", options));
      if (entry.contains("weight")) weights.push_back(rational_field(entry, "weight", p));
    } else {
      members.push_back(parse_env_at(entry, p, options));
    }
    if (members.back()->alphabet() != members.front()->alphabet()) {
      fail(ErrorCode::validation, p, "alphabet differs from the first member");
    }
  }
  if (!weights.empty() && weights.size() != members.size()) {
    fail(ErrorCode::parse, path, "weights must be given for every member or for none");
  }
  ClassSpec out{nullptr, WeightScheme::standard(members.size())};
  at_path(path, [&] {
    out.cls = std::make_shared<EnvClass>(std::move(members), options.cert_depth);
    if (!weights.empty()) out.weights = WeightScheme::explicit_weights(std::move(weights));
    return 0;
  });
  return out;
}

EnvPtr parse_markov(const json& spec, const std::string& path) {
  const std::size_t alphabet = size_field(spec, "alphabet", path, 2);
  const std::size_t order = size_field(spec, "order", path, 1);
  const auto start = static_cast<Symbol>(size_field(spec, "start", path, 0));
  const json& rows = field(spec, "rows", path);
  if (!rows.is_object()) fail(ErrorCode::parse, path + "/rows", "expected an object keyed by context");
  std::map<Word, std::vector<Rational>> table;
  for (const auto& [key, row] : rows.items()) {
    const std::string p = path + "/rows/" + key;
    Word ctx = at_path(p, [&] { return Word::parse(key, alphabet); });
    table.emplace(std::move(ctx), rational_array(row, p));
  }
  return make_markov(alphabet, order, std::move(table), start);
}

EnvPtr parse_table(const json& spec, const std::string& path) {
  const std::size_t alphabet = size_field(spec, "alphabet", path, 2);
  const std::size_t depth = json_size(field(spec, "depth", path), path + "/depth");
  TailPolicy tail = TailPolicy::error;
  if (spec.contains("beyond")) {
    const std::string b = string_field(spec, "beyond", path);
    if (b == "zero") {
      tail = TailPolicy::zero;
    } else if (b != "error") {
      fail(ErrorCode::parse, path + "/beyond", "expected \"error\" or \"zero\"");
    }
  }
  const json& values = field(spec, "values", path);
  if (!values.is_object()) fail(ErrorCode::parse, path + "/values", "expected an object keyed by string");
  std::map<Word, Rational> table;
  for (const auto& [key, v] : values.items()) {
    const std::string p = path + "/values/" + key;
    Word w = at_path(p, [&] { return Word::parse(key, alphabet); });
    if (w.size() > depth) fail(ErrorCode::validation, p, "string longer than the table depth");
    table.emplace(std::move(w), json_rational(v, p));
  }
  auto env = make_table(alphabet, depth, std::move(table), tail);
  const auto report = validate(*env, depth);
  if (!report.is_semimeasure) {
    fail(ErrorCode::validation, path, "not a semimeasure at '" + report.first_defect_node->str() + "': " + report.defect);
  }
  return env;
}

EnvPtr parse_derived(const json& spec, const std::string& path, const ParseOptions& options) {
  const std::string op = string_field(spec, "op", path);
  if (op == "mixture") return parse_mixture_at(spec, path, options);
  if (op == "quasimeasure") {
    auto base = parse_env_at(field(spec, "base", path), path + "/base", options);
    return quasimeasure_transform(std::move(base), size_field(spec, "depth_cap", path, kDefaultQuasiDepthCap));
  }
  if (op == "normalize") return make_normalized(parse_env_at(field(spec, "base", path), path + "/base", options));
  if (op == "scaled") {
    auto base = parse_env_at(field(spec, "base", path), path + "/base", options);
    return make_scaled(std::move(base), rational_field(spec, "c", path));
  }
  if (op == "contaminated") {
    auto nu = parse_env_at(field(spec, "nu", path), path + "/nu", options);
    auto mix = parse_mixture_at(field(spec, "mixture", path), path + "/mixture", options);
    return build_mprime(std::move(nu), std::move(mix), rational_field(spec, "gamma", path)).composite;
  }
  if (op == "nu_stage") return std::make_shared<NuStageEnv>(word_field(spec, "alpha", path, 2));
  if (op == "nu_limit") {
    return std::make_shared<NuLimitEnv>(word_field(spec, "prefix", path, 2), word_field(spec, "cycle", path, 2),
                                        json_size(field(spec, "depth", path), path + "/depth"));
  }
  if (op == "materialized") {
    const std::string origin = spec.contains("origin") ? string_field(spec, "origin", path) : std::string("snapshot");
    const json& table = field(spec, "table", path);
    auto inner = parse_table(table, path + "/table");
    return materialize(*inner, json_size(field(table, "depth", path + "/table"), path + "/table/depth"), origin);
  }
  fail(ErrorCode::parse, path + "/op", "unknown derived op '" + op + "'");
}

EnvPtr build_env(const json& spec, const std::string& path, const ParseOptions& options) {
  const std::string kind = string_field(spec, "kind", path);
  if (kind == "bernoulli") return make_bernoulli(rational_field(spec, "p", path));
  if (kind == "uniform") return make_uniform(size_field(spec, "alphabet", path, 2));
  if (kind == "categorical") return make_categorical(rational_array(field(spec, "probs", path), path + "/probs"));
  if (kind == "markov") return parse_markov(spec, path);
  if (kind == "decaying") {
    const std::size_t beta = size_field(spec, "beta", path, 2);
    return make_decaying(static_cast<unsigned>(beta));
  }
  if (kind == "deterministic") {
    const std::size_t alphabet = size_field(spec, "alphabet", path, 2);
    return make_deterministic(word_field(spec, "prefix", path, alphabet), word_field(spec, "cycle", path, alphabet));
  }
  if (kind == "leaky") {
    auto base = parse_env_at(field(spec, "base", path), path + "/base", options);
    return make_leaky(std::move(base), rational_field(spec, "leak", path));
  }
  if (kind == "table") return parse_table(spec, path);
  if (kind == "derived") return parse_derived(spec, path, options);
  fail(ErrorCode::parse, path + "/kind", "unknown kind '" + kind + "'");
}

void check_declared(const Environment& env, const json& spec, const std::string& path, const ParseOptions& options) {
  auto it = spec.find("declared_class");
  if (it == spec.end()) return;
  if (!it->is_string()) fail(ErrorCode::parse, path + "/declared_class", "expected a string");
  const std::string declared = it->get<std::string>();
  if (declared != "measure" && declared != "semimeasure") {
    fail(ErrorCode::parse, path + "/declared_class", "expected \"measure\" or \"semimeasure\"");
  }
  std::size_t depth = default_cert_depth(env.alphabet(), options.cert_depth);
  if (auto limit = env.depth_limit()) depth = std::min(depth, *limit);
  const auto report = validate(env, depth);
  if (!report.is_semimeasure) {
    fail(ErrorCode::validation, path, "not a semimeasure at '" + report.first_defect_node->str() + "': " + report.defect);
  }
  if (declared == "measure" && !report.is_measure_to_depth) {
    fail(ErrorCode::validation, path,
         "declared a measure but mass is lost at '" + report.first_measure_defect->str() + "'");
  }
}

EnvPtr parse_env_at(const json& spec, const std::string& path, const ParseOptions& options) {
  if (!spec.is_object()) fail(ErrorCode::parse, path, "environment spec must be an object");
  EnvPtr env = at_path(path, [&] { return build_env(spec, path, options); });
  check_declared(*env, spec, path, options);
  return env;
}

MixturePtr parse_mixture_at(const json& spec, const std::string& path, const ParseOptions& options) {
  if (spec.is_array()) {
    auto cs = parse_class_at(spec, path, options);
    return std::make_shared<MixtureEnv>(cs.cls, cs.weights, MixtureMode::raw);
  }
  if (!spec.is_object() || spec.value("op", "") != "mixture") {
    fail(ErrorCode::parse, path, "expected a mixture spec or a class array");
  }
  ParseOptions inner = options;
  inner.cert_depth = size_field(spec, "cert_depth", path, options.cert_depth);
  auto cs = parse_class_at(field(spec, "class", path), path + "/class", inner);
  return at_path(path, [&] {
    const MixtureMode mode = spec.contains("mode") ? parse_mixture_mode(string_field(spec, "mode", path))
                                                   : MixtureMode::raw;
    std::optional<std::size_t> k;
    if (spec.contains("k")) k = json_size(spec["k"], path + "/k");
    return std::make_shared<const MixtureEnv>(cs.cls, cs.weights, mode, k,
                                              size_field(spec, "depth_cap", path, kDefaultQuasiDepthCap));
  });
}

}  // namespace

Rational json_rational(const json& value, const std::string& path) {
  if (value.is_string()) return at_path(path, [&] { return parse_rational(value.get<std::string>()); });
  if (value.is_number_integer()) return Rational(value.get<long>());
  fail(ErrorCode::parse, path, "expected a rational string \"num/den\"");
}

EnvPtr parse_env(const json& spec, const ParseOptions& options) { return parse_env_at(spec, "", options); }

ClassSpec parse_class(const json& spec, const ParseOptions& options) { return parse_class_at(spec, "", options); }

MixturePtr parse_mixture(const json& spec, const ParseOptions& options) {
  return parse_mixture_at(spec, "", options);
}

json class_to_json(const EnvClass& cls, const WeightScheme& weights) {
  json out = json::array();
  for (std::size_t i = 1; i <= cls.size(); ++i) {
    if (weights.is_default()) {
      out.push_back(cls[i]->to_json());
    } else {
      out.push_back({{"env", cls[i]->to_json()}, {"weight", to_string(weights(i))}});
    }
  }
  return out;
}

FunctionalPtr parse_functional(const json& spec) {
  const std::string kind = string_field(spec, "kind", "");
  const Rational eps = rational_field(spec, "eps", "");
  return at_path("", [&] {
    if (kind == "constant") return make_constant_functional(eps);
    if (kind == "zero") return make_zero_functional(eps);
    if (kind == "indicator") return make_indicator_functional(eps);
    if (kind == "zero-run") return make_zero_run_functional(eps);
    throw Error(ErrorCode::parse, "unknown functional kind '" + kind + "'");
  });
}

json load_json(std::string_view path_or_inline) {
  const auto first = path_or_inline.find_first_not_of(" \t\r\n");
  std::string text;
  if (first != std::string_view::npos && (path_or_inline[first] == '{' || path_or_inline[first] == '[')) {
    text = path_or_inline;
  } else {
    std::ifstream in{std::string(path_or_inline)};
    if (!in) throw Error(ErrorCode::io, "cannot read spec file '" + std::string(path_or_inline) + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace semilab
