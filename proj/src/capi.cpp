#include "semilab/semilab.h"

#include "semilab/envcore.hpp"
#include "semilab/error.hpp"
#include "semilab/experiments.hpp"
#include "semilab/parallel.hpp"
#include "semilab/spec.hpp"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

struct semilab_env {
  semilab::EnvPtr env;
};

struct semilab_run {
  semilab::RunResult result;
  std::string outcome;
  std::string manifest;
  std::vector<std::pair<std::string, std::string>> artifacts;
};

namespace {

thread_local std::string last_error;

semilab_status status_of(semilab::ErrorCode code) {
  return static_cast<semilab_status>(static_cast<int>(code) + 1);
}

template <class F>
semilab_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SEMILAB_OK;
  } catch (const semilab::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return SEMILAB_E_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw semilab::Error(semilab::ErrorCode::invalid_argument, std::string(what) + " is null");
}

semilab::Word word_of(const semilab_env* env, const char* text) {
  return semilab::Word::parse(text ? text : "", env->env->alphabet());
}

}  // namespace

extern "C" {

const char* semilab_version(void) { return semilab::artifact_version(); }

const char* semilab_status_name(semilab_status status) {
  if (status == SEMILAB_OK) return "ok";
  if (status == SEMILAB_E_INTERNAL) return "internal";
  if (status < SEMILAB_OK || status > SEMILAB_E_INTERNAL) return "unknown";
  return semilab::to_string(static_cast<semilab::ErrorCode>(static_cast<int>(status) - 1));
}

const char* semilab_last_error(void) { return last_error.c_str(); }

void semilab_string_free(char* text) { delete[] text; }

semilab_status semilab_set_workers(unsigned count) {
  return guarded([&] {
    if (count == 0) throw semilab::Error(semilab::ErrorCode::invalid_argument, "worker count must be positive");
    semilab::set_workers(count);
  });
}

semilab_status semilab_env_from_json(const char* spec, size_t cert_depth, semilab_env** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    semilab::ParseOptions options;
    options.cert_depth = cert_depth;
    auto env = semilab::parse_env(semilab::load_json(spec), options);
    *out = new semilab_env{std::move(env)};
  });
}

void semilab_env_free(semilab_env* env) { delete env; }

size_t semilab_env_alphabet(const semilab_env* env) { return env ? env->env->alphabet() : 0; }

semilab_status semilab_env_eval(const semilab_env* env, const char* word, char** out) {
  return guarded([&] {
    require(env, "env");
    require(out, "out");
    *out = copy_string(semilab::to_string(env->env->eval(word_of(env, word))));
  });
}

semilab_status semilab_env_posterior(const semilab_env* env, const char* word, char** out) {
  return guarded([&] {
    require(env, "env");
    require(out, "out");
    nlohmann::json row = nlohmann::json::array();
    for (const auto& p : semilab::posterior(*env->env, word_of(env, word)).entries) row.push_back(semilab::to_string(p));
    *out = copy_string(row.dump());
  });
}

semilab_status semilab_env_validate(const semilab_env* env, size_t depth, char** out) {
  return guarded([&] {
    require(env, "env");
    require(out, "out");
    const auto r = semilab::validate(*env->env, depth);
    nlohmann::json j = {{"depth", r.depth},
                        {"is_semimeasure", r.is_semimeasure},
                        {"is_measure_to_depth", r.is_measure_to_depth},
                        {"nodes_checked", r.nodes_checked}};
    if (r.first_defect_node) j["first_defect_node"] = r.first_defect_node->str();
    if (!r.defect.empty()) j["defect"] = r.defect;
    if (r.first_measure_defect) j["first_measure_defect"] = r.first_measure_defect->str();
    *out = copy_string(j.dump());
  });
}

semilab_status semilab_env_sample(const semilab_env* env, size_t length, uint64_t seed, char** out) {
  return guarded([&] {
    require(env, "env");
    require(out, "out");
    *out = copy_string(semilab::sample(*env->env, length, seed).word.str());
  });
}

semilab_status semilab_env_to_json(const semilab_env* env, char** out) {
  return guarded([&] {
    require(env, "env");
    require(out, "out");
    *out = copy_string(env->env->to_json().dump());
  });
}

semilab_status semilab_experiment_run(const semilab_run_options* options, semilab_run** out) {
  return guarded([&] {
    require(options, "options");
    require(options->subcommand, "subcommand");
    require(out, "out");
    semilab::ExperimentConfig cfg;
    cfg.subcommand = options->subcommand;
    if (options->spec) cfg.spec = semilab::load_json(options->spec);
    if (options->has_depth) cfg.depth = options->depth;
    if (options->precision) cfg.precision = options->precision;
    if (options->has_seed) cfg.seed = options->seed;
    if (options->format) cfg.format = semilab::parse_output_format(options->format);
    if (options->multiplier) cfg.multiplier = semilab::parse_rational(options->multiplier);
    auto run = std::make_unique<semilab_run>();
    run->result = semilab::run_experiment(cfg);
    run->outcome = semilab::to_string(run->result.outcome);
    run->manifest = run->result.manifest.dump(2) + "\n";
    for (const auto& [name, content] : run->result.artifacts) run->artifacts.emplace_back(name, content);
    *out = run.release();
  });
}

int semilab_run_exit_code(const semilab_run* run) { return run ? run->result.exit_code() : 1; }

const char* semilab_run_outcome(const semilab_run* run) { return run ? run->outcome.c_str() : ""; }

const char* semilab_run_manifest(const semilab_run* run) { return run ? run->manifest.c_str() : ""; }

size_t semilab_run_artifact_count(const semilab_run* run) { return run ? run->artifacts.size() : 0; }

semilab_status semilab_run_artifact(const semilab_run* run, size_t index, const char** name, const char** content,
                                    size_t* length) {
  return guarded([&] {
    require(run, "run");
    if (index >= run->artifacts.size()) {
      throw semilab::Error(semilab::ErrorCode::invalid_argument, "artifact index out of range");
    }
    const auto& [n, c] = run->artifacts[index];
    if (name) *name = n.c_str();
    if (content) *content = c.c_str();
    if (length) *length = c.size();
  });
}

void semilab_run_free(semilab_run* run) { delete run; }

size_t semilab_experiment_count(void) { return semilab::experiment_names().size(); }

const char* semilab_experiment_name(size_t index) {
  const auto& names = semilab::experiment_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

}  // extern "C"
