/* conewave: numerical laboratory for a damped nonlinear wave equation on a
 * cone collar, exposed as a flat C API with opaque handles and error codes.
 *
 * Every fallible call returns a cw_status; when a char* errbuf is supplied,
 * a failure writes a NUL-terminated diagnostic (config failures list every
 * violated key with its line).  Handles are created and destroyed in pairs
 * (cw_x_create/cw_x_free); passing NULL where a handle is expected yields
 * CW_ERR_INVALID.
 */
#ifndef CONEWAVE_H
#define CONEWAVE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cw_status {
    CW_OK = 0,
    CW_ERR_INVALID = 1, /* bad arguments or violated preconditions */
    CW_ERR_CONFIG = 2,  /* configuration parse or validation failure */
    CW_ERR_RUNTIME = 3, /* solver failure or unmet model hypothesis */
    CW_ERR_IO = 4       /* filesystem problem */
} cw_status;

const char* cw_version(void);

/* --- configuration --------------------------------------------------- */

typedef struct cw_config cw_config;

cw_status cw_config_parse_text(const char* text, cw_config** out,
                               char* errbuf, size_t errbuf_len);
cw_status cw_config_parse_file(const char* path, cw_config** out,
                               char* errbuf, size_t errbuf_len);
void cw_config_free(cw_config* cfg);

/* Command-line overrides applied after parsing. */
cw_status cw_config_set_out_dir(cw_config* cfg, const char* dir);
cw_status cw_config_set_seed(cw_config* cfg, uint64_t seed);

/* --- runs -------------------------------------------------------------- */

typedef struct cw_report cw_report;

/* Full pipeline: constants, initial data, integration, diagnostics, and the
 * series.csv / summary.txt pair under the configured output directory. */
cw_status cw_run(const cw_config* cfg, cw_report** out, char* errbuf, size_t errbuf_len);

/* Parameter sweep writing phase_table.csv. */
cw_status cw_sweep(const cw_config* cfg, cw_report** out, char* errbuf, size_t errbuf_len);

void cw_report_free(cw_report* report);

/* Process exit-code convention: 0 completed horizon, 2 blow-up detected
 * (a successful outcome), 1 reserved for errors. */
int cw_report_exit_code(const cw_report* report);
const char* cw_report_classification(const cw_report* report); /* "" for sweeps */
double cw_report_blowup_time(const cw_report* report);         /* NaN when none */
const char* cw_report_series_path(const cw_report* report);    /* "" when absent */
const char* cw_report_summary_path(const cw_report* report);
const char* cw_report_table_path(const cw_report* report);
const char* cw_report_summary_text(const cw_report* report);

/* Discrete constants (eigenvalue, embedding, potential, well depth) as
 * "key = value" text. */
cw_status cw_constants_text(const cw_config* cfg, char* buf, size_t buf_len,
                            char* errbuf, size_t errbuf_len);

/* --- direct numerical queries ------------------------------------------ */

typedef struct cw_grid cw_grid;

cw_status cw_grid_create(int n, int Ns, int Nx, double s_min, double torus_length,
                         cw_grid** out, char* errbuf, size_t errbuf_len);
void cw_grid_free(cw_grid* grid);
int64_t cw_grid_interior_count(const cw_grid* grid);
double cw_grid_total_measure(const cw_grid* grid);
double cw_grid_cfl_limit(const cw_grid* grid);
cw_status cw_grid_lambda1(const cw_grid* grid, double* lambda1,
                          char* errbuf, size_t errbuf_len);

/* Root of v + dt |v|^(m-2) v = v_pred (implicit nodal damping update). */
cw_status cw_damping_solve(double v_pred, double dt, double m, double* v_out,
                           char* errbuf, size_t errbuf_len);

#ifdef __cplusplus
}
#endif

#endif /* CONEWAVE_H */
