/* Exercises the C API from plain C. */
#include "semilab/semilab.h"

#include <stdio.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                          \
  do {                                                       \
    if (!(cond)) {                                           \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                            \
    }                                                        \
  } while (0)

int main(void) {
  semilab_env* env = NULL;
  char* text = NULL;

  CHECK(semilab_env_from_json("{\"kind\":\"bernoulli\",\"p\":\"1/3\"}", 8, &env) == SEMILAB_OK);
  CHECK(semilab_env_alphabet(env) == 2);
  CHECK(semilab_env_eval(env, "11", &text) == SEMILAB_OK);
  CHECK(strcmp(text, "1/9") == 0);
  semilab_string_free(text);
  CHECK(semilab_env_posterior(env, "0", &text) == SEMILAB_OK);
  CHECK(strcmp(text, "[\"2/3\",\"1/3\"]") == 0);
  semilab_string_free(text);
  CHECK(semilab_env_validate(env, 4, &text) == SEMILAB_OK);
  CHECK(strstr(text, "\"is_measure_to_depth\":true") != NULL);
  semilab_string_free(text);
  CHECK(semilab_env_sample(env, 6, 3, &text) == SEMILAB_OK);
  CHECK(strlen(text) == 6);
  semilab_string_free(text);
  CHECK(semilab_env_eval(env, "012", &text) == SEMILAB_E_PARSE);
  CHECK(strlen(semilab_last_error()) > 0);
  semilab_env_free(env);

  env = NULL;
  CHECK(semilab_env_from_json("{\"kind\":\"bernoulli\",\"p\":\"4/3\"}", 8, &env) == SEMILAB_E_VALIDATION);
  CHECK(env == NULL);
  CHECK(strcmp(semilab_status_name(SEMILAB_E_NEEDS_LARGER_TMAX), "needs-larger-t_max") == 0);
  CHECK(semilab_set_workers(0) == SEMILAB_E_INVALID_ARGUMENT);

  CHECK(semilab_experiment_count() == 10);
  semilab_run_options o;
  memset(&o, 0, sizeof o);
  o.subcommand = "leftmost-alpha";
  o.spec = "{\"mixture\":[{\"env\":{\"kind\":\"uniform\"},\"weight\":\"1\"}]}";
  o.has_depth = 1;
  o.depth = 8;
  semilab_run* run = NULL;
  CHECK(semilab_experiment_run(&o, &run) == SEMILAB_OK);
  CHECK(semilab_run_exit_code(run) == 0);
  CHECK(strcmp(semilab_run_outcome(run), "certified-holds") == 0);
  CHECK(strstr(semilab_run_manifest(run), "\"leftmost-alpha\"") != NULL);
  int found = 0;
  for (size_t i = 0; i < semilab_run_artifact_count(run); ++i) {
    const char* name = NULL;
    const char* content = NULL;
    size_t length = 0;
    CHECK(semilab_run_artifact(run, i, &name, &content, &length) == SEMILAB_OK);
    if (strcmp(name, "alpha.txt") == 0) found = strncmp(content, "00000000", 8) == 0;
  }
  CHECK(found);
  CHECK(semilab_run_artifact(run, 1000, NULL, NULL, NULL) == SEMILAB_E_INVALID_ARGUMENT);
  semilab_run_free(run);

  o.subcommand = "counterexample";
  o.spec = "{\"class\":[{\"env\":{\"kind\":\"uniform\"},\"weight\":\"1\"}]}";
  o.has_depth = 0;
  run = NULL;
  CHECK(semilab_experiment_run(&o, &run) == SEMILAB_E_INCONCLUSIVE_CONFIGURATION);
  CHECK(run == NULL);

  if (failures == 0) printf("capi: ok\n");
  return failures == 0 ? 0 : 1;
}
