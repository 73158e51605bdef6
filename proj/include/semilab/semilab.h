#ifndef SEMILAB_H
#define SEMILAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SEMILAB_API __declspec(dllexport)
#else
#define SEMILAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum semilab_status {
  SEMILAB_OK = 0,
  SEMILAB_E_INVALID_ARGUMENT,
  SEMILAB_E_PARSE,
  SEMILAB_E_VALIDATION,
  SEMILAB_E_DEPTH_EXCEEDED,
  SEMILAB_E_CAP_EXCEEDED,
  SEMILAB_E_UNDEFINED_POSTERIOR,
  SEMILAB_E_NOT_A_MEASURE,
  SEMILAB_E_NOT_A_MEASURE_ROW,
  SEMILAB_E_NOT_DOMINATED,
  SEMILAB_E_NORMALIZATION,
  SEMILAB_E_APPROXIMABLE_NOT_MEASURE,
  SEMILAB_E_HYPOTHESIS_FAILED,
  SEMILAB_E_INVALID_K0,
  SEMILAB_E_INCONCLUSIVE_CONFIGURATION,
  SEMILAB_E_NEEDS_LARGER_TMAX,
  SEMILAB_E_IO,
  SEMILAB_E_INTERNAL
} semilab_status;

/* Opaque handles. */
typedef struct semilab_env semilab_env;
typedef struct semilab_run semilab_run;

SEMILAB_API const char* semilab_version(void);
/* Short name of a status, e.g. "needs-larger-t_max". */
SEMILAB_API const char* semilab_status_name(semilab_status status);
/* Message of the last failed call on this thread; empty after success. */
SEMILAB_API const char* semilab_last_error(void);

/* Strings returned through char** are owned by the caller. */
SEMILAB_API void semilab_string_free(char* text);

SEMILAB_API semilab_status semilab_set_workers(unsigned count);

/* Environment from a JSON spec document, validated to cert_depth. */
SEMILAB_API semilab_status semilab_env_from_json(const char* spec, size_t cert_depth, semilab_env** out);
SEMILAB_API void semilab_env_free(semilab_env* env);
SEMILAB_API size_t semilab_env_alphabet(const semilab_env* env);
/* nu(word) as "num/den". */
SEMILAB_API semilab_status semilab_env_eval(const semilab_env* env, const char* word, char** out);
/* JSON array of nu(a|word) strings. */
SEMILAB_API semilab_status semilab_env_posterior(const semilab_env* env, const char* word, char** out);
/* JSON validation report to the given depth. */
SEMILAB_API semilab_status semilab_env_validate(const semilab_env* env, size_t depth, char** out);
SEMILAB_API semilab_status semilab_env_sample(const semilab_env* env, size_t length, uint64_t seed, char** out);
SEMILAB_API semilab_status semilab_env_to_json(const semilab_env* env, char** out);

typedef struct semilab_run_options {
  const char* subcommand;
  /* Experiment spec: JSON text, or NULL for an empty object. */
  const char* spec;
  int has_depth;
  size_t depth;
  /* 0 selects the default of 128 bits. */
  long precision;
  int has_seed;
  uint64_t seed;
  /* "csv", "json" or "plotdata"; NULL selects csv. */
  const char* format;
  /* Rational text or NULL. */
  const char* multiplier;
} semilab_run_options;

SEMILAB_API semilab_status semilab_experiment_run(const semilab_run_options* options, semilab_run** out);
/* 0 all hold, 2 any fails, 3 any inconclusive. */
SEMILAB_API int semilab_run_exit_code(const semilab_run* run);
SEMILAB_API const char* semilab_run_outcome(const semilab_run* run);
SEMILAB_API const char* semilab_run_manifest(const semilab_run* run);
SEMILAB_API size_t semilab_run_artifact_count(const semilab_run* run);
/* Borrowed pointers, valid until semilab_run_free. */
SEMILAB_API semilab_status semilab_run_artifact(const semilab_run* run, size_t index, const char** name,
                                                const char** content, size_t* length);
SEMILAB_API void semilab_run_free(semilab_run* run);

/* Number of subcommands and the name at an index. */
SEMILAB_API size_t semilab_experiment_count(void);
SEMILAB_API const char* semilab_experiment_name(size_t index);

#ifdef __cplusplus
}
#endif

#endif
