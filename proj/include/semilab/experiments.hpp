#pragma once

#include "semilab/rational.hpp"
#include "semilab/verdict.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semilab {

enum class OutputFormat { csv, json, plotdata };

const char* to_string(OutputFormat f) noexcept;
OutputFormat parse_output_format(std::string_view text);

/// One experiment invocation: a subcommand, its spec document and the
/// command-line overrides.
struct ExperimentConfig {
  std::string subcommand;
  nlohmann::json spec = nlohmann::json::object();
  std::optional<std::size_t> depth;
  mpfr_prec_t precision = kDefaultPrecision;
  std::optional<std::uint64_t> seed;
  OutputFormat format = OutputFormat::csv;
  std::optional<Rational> multiplier;
};

struct RunResult {
  std::vector<Verdict> verdicts;
  Outcome outcome = Outcome::holds;
  /// File name to content, written in name order.
  std::map<std::string, std::string> artifacts;
  nlohmann::json manifest;

  int exit_code() const noexcept { return semilab::exit_code(outcome); }
};

/// Subcommand names in dispatch order.
const std::vector<std::string>& experiment_names();

/// Runs one experiment. Errors propagate as semilab::Error; the payload
/// artifacts depend only on the config, never on timing or worker count.
RunResult run_experiment(const ExperimentConfig& config);

/// 64-bit FNV-1a of the text.
std::uint64_t fnv1a(std::string_view text);

/// Version string of the artifact format.
const char* artifact_version() noexcept;

}  // namespace semilab
