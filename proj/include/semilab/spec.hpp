#pragma once

#include "semilab/counterexample.hpp"
#include "semilab/mixtures.hpp"
#include "semilab/randomness.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace semilab {

struct ParseOptions {
  /// Depth to which class tags and "class" assertions are validated.
  std::size_t cert_depth = 8;
};

/// Environment from its JSON spec. Errors name the JSON path of the bad node.
EnvPtr parse_env(const nlohmann::json& spec, const ParseOptions& options = {});

struct ClassSpec {
  ClassPtr cls;
  WeightScheme weights;
};

/// Array of environment specs, each optionally wrapped as {"env", "weight"}.
/// Weights are given for every member or for none; none selects the default
/// i^-6 2^-i.
ClassSpec parse_class(const nlohmann::json& spec, const ParseOptions& options = {});

/// Class array of a class spec for the given class and weights.
nlohmann::json class_to_json(const EnvClass& cls, const WeightScheme& weights);

/// Accepts a mixture spec {"kind":"derived","op":"mixture",...} or a bare
/// class array (raw mode).
MixturePtr parse_mixture(const nlohmann::json& spec, const ParseOptions& options = {});

FunctionalPtr parse_functional(const nlohmann::json& spec);

Rational json_rational(const nlohmann::json& value, const std::string& path);

/// Inline JSON when the text starts with '{' or '[', else a file path.
nlohmann::json load_json(std::string_view path_or_inline);

}  // namespace semilab
