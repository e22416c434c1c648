#ifndef GARCHPD_H
#define GARCHPD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum GdStatus {
  GD_STATUS_OK = 0,
  GD_STATUS_NULL_POINTER = 1,
  // Argument outside the domain of the operation.
  GD_STATUS_DOMAIN = 2,
  GD_STATUS_INVALID_PARAMS = 3,
  // A series, iteration or quadrature missed its tolerance.
  GD_STATUS_CONVERGENCE = 4,
  GD_STATUS_RESOURCE = 5,
  // Malformed JSON or table document.
  GD_STATUS_FORMAT = 6,
  GD_STATUS_IO = 7,
  GD_STATUS_PANIC = 8,
} GdStatus;

// Model parameters. Opaque.
typedef struct GdParams GdParams;

// Coefficient table for one horizon. Opaque.
typedef struct GdTable GdTable;

// VaR and ES at one tail probability, in the table's units.
typedef struct GdRisk {
  double p;
  double var;
  double es;
  uint32_t iterations;
  double gaussian_var;
  double gaussian_es;
  double ratio_var;
  double ratio_es;
} GdRisk;

// Replications needed for Monte Carlo VaR and ES intervals of length 10^-a.
typedef struct GdPlan {
  uint64_t r_var;
  uint64_t r_es;
  double f_at_q;
  double v_sq;
} GdPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until
// the next call into this library from the same thread.
const char *gd_last_error(void);

// Library version as a static NUL-terminated string.
const char *gd_version(void);

// Free a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void gd_string_free(char *s);

// Parameters from values. `lambda` is the GJR leverage term; `sign0` is
// the sign of x₀ (+1 or −1), which only matters when `lambda` ≠ 0.
//
// # Safety
// `out_params` must be valid for writes.
enum GdStatus gd_params_new(double omega,
                            double alpha,
                            double beta,
                            double lambda,
                            double sigma0_sq,
                            double x0_sq,
                            int32_t sign0,
                            struct GdParams **out_params);

// Parameters from a JSON document, in the same format as the CLI's
// `--params` files.
//
// # Safety
// `json` must be a NUL-terminated string; `out_params` must be valid for writes.
enum GdStatus gd_params_from_json(const char *json, struct GdParams **out_params);

// # Safety
// `params` must come from this library and not have been freed. NULL is ignored.
void gd_params_free(struct GdParams *params);

// Build the coefficient table for horizon `h`. `j_max` = 0 uses the default.
//
// # Safety
// `params` must be a live handle; `out_table` must be valid for writes.
enum GdStatus gd_table_build(const struct GdParams *params,
                             uint32_t h,
                             uint32_t j_max,
                             struct GdTable **out_table);

// New table rescaled to unit variance. `out_scale` (may be NULL) receives
// the standard deviation of x_h.
//
// # Safety
// `table` must be a live handle; `out_table` must be valid for writes.
enum GdStatus gd_table_standardize(const struct GdTable *table,
                                   double *out_scale,
                                   struct GdTable **out_table);

// # Safety
// `table` must come from this library and not have been freed. NULL is ignored.
void gd_table_free(struct GdTable *table);

// Serialize a table. Free the result with `gd_string_free`.
//
// # Safety
// `table` must be a live handle; `out_json` must be valid for writes.
enum GdStatus gd_table_to_json(const struct GdTable *table, char **out_json);

// # Safety
// `json` must be a NUL-terminated string; `out_table` must be valid for writes.
enum GdStatus gd_table_from_json(const char *json, struct GdTable **out_table);

// Horizon and outer truncation of a table. Either output may be NULL.
//
// # Safety
// `table` must be a live handle.
enum GdStatus gd_table_info(const struct GdTable *table, uint32_t *out_h, uint32_t *out_j_max);

// # Safety
// `table` must be a live handle; `out_value` must be valid for writes.
enum GdStatus gd_pdf(const struct GdTable *table, double u, double *out_value);

// # Safety
// `table` must be a live handle; `out_value` must be valid for writes.
enum GdStatus gd_cdf(const struct GdTable *table, double u, double *out_value);

// Density of z_h = x_h² at `w`.
//
// # Safety
// `table` must be a live handle; `out_value` must be valid for writes.
enum GdStatus gd_pdf_z(const struct GdTable *table, double w, double *out_value);

// # Safety
// `table` must be a live handle; `out_value` must be valid for writes.
enum GdStatus gd_cdf_z(const struct GdTable *table, double w, double *out_value);

// E(x_h^{2m}) in the table's units.
//
// # Safety
// `table` must be a live handle; `out_value` must be valid for writes.
enum GdStatus gd_moment(const struct GdTable *table, uint32_t m, double *out_value);

// VaR and ES at tail probability `p` in (0, 0.5].
//
// # Safety
// `table` must be a live handle; `out_risk` must be valid for writes.
enum GdStatus gd_risk(const struct GdTable *table, double p, struct GdRisk *out_risk);

// Monte Carlo replication plan at confidence 1 − `eta` and interval
// length 10^-`a`, from the exact VaR and ES of `table`.
//
// # Safety
// `table` must be a live handle; `out_plan` must be valid for writes.
enum GdStatus gd_plan(const struct GdTable *table,
                      double p,
                      double eta,
                      double a,
                      struct GdPlan *out_plan);

// Stationary tail index κ solving E((αε² + β)^κ) = 1.
//
// # Safety
// `out_kappa` must be valid for writes.
enum GdStatus gd_tail_index(double alpha, double beta, double tol, double *out_kappa);

// Simulate `r` terminal values x_h into `out_sample`, which must hold
// `r` doubles. Deterministic given `seed`.
//
// # Safety
// `params` must be a live handle; `out_sample` must be valid for `r` writes.
enum GdStatus gd_simulate(const struct GdParams *params,
                          uint32_t h,
                          size_t r,
                          uint64_t seed,
                          double *out_sample);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GARCHPD_H */
