/*
 * memcap — leaky-memcapacitor spiking-neuron simulation and analysis.
 *
 * C API of the shared library.  All entry points return mc_status; outputs
 * are written through pointers.  Objects are opaque handles created and
 * destroyed by the library.  On any failure the per-thread message from
 * mc_last_error() describes what went wrong.
 *
 * Handles are not thread-safe individually; distinct handles may be used
 * from distinct threads concurrently.
 */

#ifndef MEMCAP_MEMCAP_H
#define MEMCAP_MEMCAP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mc_status {
  MC_OK = 0,
  MC_ERR_VALIDATION = 1,    /* parameter/invariant violation */
  MC_ERR_DOMAIN = 2,        /* state outside the valid domain (x guard) */
  MC_ERR_NUMERIC = 3,       /* step budget, step underflow, non-finite state */
  MC_ERR_NO_DATA = 4,       /* insufficient spikes / no cycle / no bracket */
  MC_ERR_UNKNOWN_NAME = 5,  /* unknown experiment or configuration key */
  MC_ERR_IO = 6,            /* file system failure */
  MC_ERR_INVALID_ARG = 7,   /* null pointer, bad index, bad value */
  MC_ERR_INTERNAL = 8
} mc_status;

/* Full parameter set: model, series element, drive, integrator, run. */
typedef struct mc_config mc_config;
/* Rectangular result table: double columns plus one optional text column. */
typedef struct mc_table mc_table;
/* Experiment report (checks, artifacts, JSON). */
typedef struct mc_report mc_report;

const char* mc_version(void);
/* Message for the most recent failure on this thread. */
const char* mc_last_error(void);

/* ------------------------------------------------------------------ */
/* configuration                                                       */

/* New configuration holding the reference defaults (d=8, x_c=6.4,
 * beta=5e4, k=5/6, r=1e-3, rho0=1.25e-4, gamma_damp=1.25e-4). */
mc_status mc_config_create(mc_config** out);
void mc_config_destroy(mc_config* cfg);

/* Load a config file over the current values.  Dotted key = value text, or
 * JSON when the path ends in .json. */
mc_status mc_config_load_file(mc_config* cfg, const char* path);
/* Set one dotted key from text, e.g. ("model.k", "0.9"). */
mc_status mc_config_set(mc_config* cfg, const char* key, const char* value);
/* Read one key back as text into buf (always NUL-terminated); *len is the
 * required size on return. */
mc_status mc_config_get(const mc_config* cfg, const char* key, char* buf,
                        size_t* len);
/* Newline-separated list of all recognized keys. */
mc_status mc_config_keys(char* buf, size_t* len);
/* Validate every invariant of the current values. */
mc_status mc_config_validate(const mc_config* cfg);

/* ------------------------------------------------------------------ */
/* tables                                                              */

void mc_table_destroy(mc_table* t);
size_t mc_table_rows(const mc_table* t);
size_t mc_table_cols(const mc_table* t);
const char* mc_table_col_name(const mc_table* t, size_t col);
mc_status mc_table_value(const mc_table* t, size_t row, size_t col,
                         double* out);
/* Text cell of the row (empty string when the table has none). */
const char* mc_table_row_label(const mc_table* t, size_t row);
const char* mc_table_label_name(const mc_table* t);
mc_status mc_table_write_csv(const mc_table* t, const char* path,
                             int precision);

/* ------------------------------------------------------------------ */
/* model evaluation                                                    */

typedef struct mc_point_eval {
  double capacitance;   /* C(x) = 1/(d - x) */
  double memristance;   /* R(x) */
  double potential;     /* U(x) */
  double potential_dx;  /* dU/dx */
  double v_c;           /* q (d - x) */
  double i_m;           /* V_C / R(x) */
  double dx_dt;
  double dq_dt;
} mc_point_eval;

/* Evaluate the constitutive laws and the planar field at (x, q) under DC
 * voltage V with the configured fixed series resistance. */
mc_status mc_eval(const mc_config* cfg, double V, double x, double q,
                  mc_point_eval* out);

/* Analytic Jacobian of the planar field: out = {a11, a12, a21, a22,
 * det, tr, delta}. */
mc_status mc_jacobian(const mc_config* cfg, double V, double x, double q,
                      double out[7]);

/* ------------------------------------------------------------------ */
/* simulation and analysis                                             */

/* Simulate the configured circuit (drive, series element, initial state,
 * duration all from cfg).  Columns: t, x, q, V_C, I_M, I_r, r_series,
 * V_drive. */
mc_status mc_simulate(const mc_config* cfg, mc_table** out);

/* Newton fixed points of the planar system at DC voltage V.  Columns:
 * V, x, q, det, Tr, Delta; the text column is the classification. */
mc_status mc_fixed_points(const mc_config* cfg, double V, mc_table** out);

/* Bifurcation thresholds of the DC-driven planar system.
 * out = {V0, V1, V1_prime, V2}. */
mc_status mc_thresholds(const mc_config* cfg, double v_min, double v_max,
                        double bisect_tol, double out[4]);

/* Closed-form sink/saddle fold voltage for the configured model. */
mc_status mc_analytic_v1prime(const mc_config* cfg, double* out);

/* Limit-cycle probe at DC voltage V from (x0, q0) over duration T.
 * *found is 0/1; period/omega are valid when found. */
mc_status mc_limit_cycle(const mc_config* cfg, double V, double x0, double q0,
                         double T, int* found, double* period, double* omega);

/* Spike frequency versus DC voltage on a uniform grid.  Columns:
 * V, omega_natural, period, period_std, n_spikes (omega 0 when fewer than
 * 5 post-transient spikes). */
mc_status mc_frequency_scan(const mc_config* cfg, double v_min, double v_max,
                            int n, mc_table** out);

/* Single-sided amplitude spectrum of one trace column (post-transient
 * fraction `skip_fraction` discarded).  Columns: omega, P1. */
mc_status mc_trace_spectrum(const mc_table* trace, const char* column,
                            double skip_fraction, mc_table** out);

/* Synchronization scan: drive V(t) = V_dc + delta_V sin(omega t) for each
 * omega in omegas.  Columns: V_dc, omega_source, locked, dominant_omega,
 * best_N, best_M, omega_spike, omega_natural_dc, all_peaks_matched; text
 * column: response class. */
mc_status mc_sync_scan(const mc_config* cfg, double v_dc, double delta_v,
                       const double* omegas, size_t n, mc_table** out);

/* Normalized flow field, trajectory bundle and fixed points at DC voltage V,
 * written as CSV files under out_dir.  n_files receives the artifact count. */
mc_status mc_portrait(const mc_config* cfg, double V, const double window[4],
                      double t_evolve, const char* out_dir, int* n_files);

/* ------------------------------------------------------------------ */
/* experiments                                                         */

/* Newline-separated registered experiment names. */
mc_status mc_experiment_list(char* buf, size_t* len);

/* Run a registered experiment; artifacts land under out_dir/<name>/.
 * want_svg != 0 additionally emits SVG plots. */
mc_status mc_experiment_run(const mc_config* cfg, const char* name,
                            const char* out_dir, int want_svg,
                            mc_report** out);

void mc_report_destroy(mc_report* rep);
const char* mc_report_json(const mc_report* rep);
int mc_report_all_passed(const mc_report* rep);
size_t mc_report_n_checks(const mc_report* rep);
size_t mc_report_n_failed(const mc_report* rep);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MEMCAP_MEMCAP_H */
