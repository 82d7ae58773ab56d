#ifndef QWIT_C_API_H
#define QWIT_C_API_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define QW_API __attribute__((visibility("default")))
#else
#define QW_API
#endif

/* Status codes. 2, 3 and 4 are also the CLI exit codes. */
typedef enum qw_status {
  QW_OK = 0,
  QW_ERR_CONFIG = 2,
  QW_ERR_DATA = 3,
  QW_ERR_NUMERIC = 4,
  QW_ERR_INVALID_ARGUMENT = 5,
  QW_ERR_CAPACITY = 6,
  QW_ERR_DOMAIN = 7,
  QW_ERR_INTERNAL = 8
} qw_status;

typedef struct qw_config qw_config;
typedef struct qw_result qw_result;
typedef struct qw_model qw_model;
typedef struct qw_ensemble qw_ensemble;

QW_API const char* qw_version(void);

/* Message of the last failing call on this thread; "" after a success. */
QW_API const char* qw_last_error(void);

/* Process exit code for a status: 0, 2 (config), 3 (data) or 4 (numeric). */
QW_API int qw_status_exit_code(qw_status status);

/* ---- run configuration ---- */

QW_API qw_status qw_config_load(const char* path, qw_config** out);
QW_API qw_status qw_config_parse(const char* yaml_text, const char* base_directory, qw_config** out);
QW_API void qw_config_free(qw_config* config);

QW_API qw_status qw_config_set_command(qw_config* config, const char* command);
QW_API qw_status qw_config_set_output(qw_config* config, const char* directory);
/* Comma-separated subset of csv, json, svg. */
QW_API qw_status qw_config_set_formats(qw_config* config, const char* formats);
QW_API qw_status qw_config_set_threads(qw_config* config, int threads);
QW_API qw_status qw_config_set_tolerance(qw_config* config, double tolerance);

/* Checks the config for `command` (NULL: the config's own) without running. */
QW_API qw_status qw_config_validate(const qw_config* config, const char* command);

/* Runs a command. On QW_OK the run itself completed; per-coordinate failures
   are listed in the result and reflected in qw_result_exit_code. */
QW_API qw_status qw_run(const qw_config* config, const char* command, qw_result** out);

QW_API int qw_result_exit_code(const qw_result* result);
QW_API size_t qw_result_report_count(const qw_result* result);
/* One JSON object per report, valid until qw_result_free. */
QW_API const char* qw_result_report_json(const qw_result* result, size_t index);
QW_API size_t qw_result_error_count(const qw_result* result);
QW_API const char* qw_result_error_json(const qw_result* result, size_t index);
QW_API size_t qw_result_file_count(const qw_result* result);
QW_API const char* qw_result_file(const qw_result* result, size_t index);
QW_API size_t qw_result_warning_count(const qw_result* result);
QW_API const char* qw_result_warning(const qw_result* result, size_t index);
QW_API void qw_result_free(qw_result* result);

/* ---- direct evaluation ---- */

/* YAML text with a top-level `model:` section. */
QW_API qw_status qw_model_parse(const char* yaml_text, qw_model** out);
QW_API qw_status qw_model_heisenberg_chain(int n_sites, double j, int periodic, qw_model** out);
QW_API qw_status qw_model_dimer_array(int n_sites, double j, qw_model** out);
QW_API int qw_model_sites(const qw_model* model);
QW_API void qw_model_free(qw_model* model);

/* Thermal state at temperature T >= 0 (T = 0: ground manifold; INFINITY allowed). */
QW_API qw_status qw_ensemble_create(const qw_model* model, double temperature, qw_ensemble** out);
QW_API void qw_ensemble_free(qw_ensemble* ensemble);

/* 4x4 reduced density matrix of sites (i, j), row-major, basis uu, ud, du, dd. */
QW_API qw_status qw_two_site_state(const qw_ensemble* ensemble, int i, int j, double re[16], double im[16]);
QW_API qw_status qw_concurrence(const qw_ensemble* ensemble, int i, int j, double* out);
QW_API qw_status qw_one_tangle(const qw_ensemble* ensemble, int site, double* out);
/* Per-site f_Q of S^mu_k, mu one of 'x', 'y', 'z'. */
QW_API qw_status qw_qfi_density(const qw_ensemble* ensemble, char component, double k, double* out);

#ifdef __cplusplus
}
#endif

#endif
