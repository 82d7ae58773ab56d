/* Exercises the C API from C, linked only against the shared library. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qwit/c_api.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static void direct_evaluation(void) {
  qw_model* m = NULL;
  qw_ensemble* e = NULL;
  double c = -1.0, tau = -1.0, f = -1.0, re[16], im[16];

  EXPECT(qw_model_heisenberg_chain(2, 1.0, 0, &m) == QW_OK);
  EXPECT(qw_model_sites(m) == 2);
  EXPECT(qw_ensemble_create(m, 0.0, &e) == QW_OK);
  EXPECT(qw_concurrence(e, 0, 1, &c) == QW_OK);
  EXPECT(fabs(c - 1.0) < 1e-12);
  EXPECT(qw_one_tangle(e, 0, &tau) == QW_OK);
  EXPECT(fabs(tau - 1.0) < 1e-12);
  EXPECT(qw_two_site_state(e, 0, 1, re, im) == QW_OK);
  EXPECT(fabs(re[5] - 0.5) < 1e-12 && fabs(re[6] + 0.5) < 1e-12);
  EXPECT(qw_qfi_density(e, 'z', 3.14159265358979323846, &f) == QW_OK);
  EXPECT(fabs(f - 2.0) < 1e-12);
  EXPECT(qw_qfi_density(e, 'q', 0.0, &f) == QW_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(qw_last_error()) > 0);
  EXPECT(qw_concurrence(e, 0, 5, &c) != QW_OK);
  qw_ensemble_free(e);
  qw_model_free(m);

  EXPECT(qw_ensemble_create(NULL, 1.0, &e) == QW_ERR_INVALID_ARGUMENT);
  EXPECT(qw_model_parse("model: {kind: DimerArray, n_sites: 3}", &m) != QW_OK);
  EXPECT(qw_model_parse("model: {kind: DimerArray, n_sites: 4, j: 1.0}", &m) == QW_OK);
  EXPECT(qw_model_sites(m) == 4);
  qw_model_free(m);
}

static void runs(const char* out_dir) {
  qw_config* cfg = NULL;
  qw_result* res = NULL;
  size_t i;
  int saw_concurrence = 0;

  EXPECT(qw_config_parse("temperatures: [0.5]\n", ".", &cfg) == QW_OK);
  EXPECT(qw_config_validate(cfg, "witness") == QW_ERR_CONFIG); /* no model */
  qw_config_free(cfg);

  EXPECT(qw_config_parse("bad: [", ".", &cfg) == QW_ERR_CONFIG);
  EXPECT(qw_status_exit_code(QW_ERR_CONFIG) == 2);
  EXPECT(qw_status_exit_code(QW_ERR_DATA) == 3);
  EXPECT(qw_status_exit_code(QW_ERR_NUMERIC) == 4);

  EXPECT(qw_config_parse("model: {kind: DimerArray, n_sites: 2, j: 1.0}\n"
                         "temperatures: [0.5, 2.0]\n"
                         "witnesses: [concurrence, susceptibility]\n",
                         ".", &cfg) == QW_OK);
  EXPECT(qw_config_set_output(cfg, out_dir) == QW_OK);
  EXPECT(qw_config_set_formats(cfg, "csv,json") == QW_OK);
  EXPECT(qw_config_set_formats(cfg, "csv,pdf") == QW_ERR_CONFIG);
  EXPECT(qw_config_set_threads(cfg, 0) == QW_ERR_CONFIG);
  EXPECT(qw_config_set_tolerance(cfg, 1e-9) == QW_OK);
  EXPECT(qw_config_set_command(cfg, "nonsense") == QW_ERR_CONFIG);
  EXPECT(qw_run(cfg, NULL, &res) == QW_ERR_CONFIG); /* no command yet */
  EXPECT(qw_run(cfg, "witness", &res) == QW_OK);
  EXPECT(qw_result_exit_code(res) == 0);
  EXPECT(qw_result_report_count(res) == 4);
  EXPECT(qw_result_error_count(res) == 0);
  EXPECT(qw_result_file_count(res) > 0);
  for (i = 0; i < qw_result_report_count(res); ++i) {
    if (strstr(qw_result_report_json(res, i), "\"witness\":\"concurrence\"")) saw_concurrence = 1;
  }
  EXPECT(saw_concurrence);
  EXPECT(qw_result_report_json(res, 99) == NULL);
  qw_result_free(res);
  qw_config_free(cfg);
}

int main(int argc, char** argv) {
  printf("qwit %s\n", qw_version());
  direct_evaluation();
  runs(argc > 1 ? argv[1] : "capi-out");
  if (failures) fprintf(stderr, "%d checks failed\n", failures);
  return failures ? 1 : 0;
}
