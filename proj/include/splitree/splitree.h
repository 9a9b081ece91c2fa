#ifndef SPLITREE_SPLITREE_H
#define SPLITREE_SPLITREE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SPLITREE_API __declspec(dllexport)
#else
#define SPLITREE_API __attribute__((visibility("default")))
#endif

/* Status codes. 1..9 mirror the core error categories. */
typedef enum splitree_status {
  SPLITREE_OK = 0,
  SPLITREE_E_CONFIG = 1,
  SPLITREE_E_DOMAIN = 2,
  SPLITREE_E_OUT_OF_TABLE = 3,
  SPLITREE_E_UNSUPPORTED = 4,
  SPLITREE_E_INTEGRITY = 5,
  SPLITREE_E_NOT_IDENTIFIABLE = 6,
  SPLITREE_E_EMPTY = 7,
  SPLITREE_E_IO = 8,
  SPLITREE_E_AMBIGUITY = 9,
  SPLITREE_E_VERIFY_FAILED = 10, /* a verification battery ran and some check failed */
  SPLITREE_E_ARGUMENT = 11,      /* null handle or output pointer */
  SPLITREE_E_INTERNAL = 12
} splitree_status;

SPLITREE_API const char* splitree_version(void);
SPLITREE_API const char* splitree_status_name(splitree_status s);
/* Message of the last failing call on this thread ("" if none). */
SPLITREE_API const char* splitree_last_error(void);
/* Frees strings returned through char** outputs. */
SPLITREE_API void splitree_string_free(char* s);

/* ---- model: birth rate b and lifetime law ("exp:<rate>", "det:<c>", "table:<csv>") ---- */
typedef struct splitree_model splitree_model;

SPLITREE_API splitree_status splitree_model_create(const char* lifetime, double b, splitree_model** out);
SPLITREE_API void splitree_model_free(splitree_model* m);
SPLITREE_API splitree_status splitree_model_describe(const splitree_model* m, char** out);
SPLITREE_API splitree_status splitree_model_psi(const splitree_model* m, double a, double* out);
SPLITREE_API splitree_status splitree_model_phi(const splitree_model* m, double q, double* out);
SPLITREE_API splitree_status splitree_model_eta(const splitree_model* m, double* out);

/* ---- scale table W^(q); h <= 0 or x_max <= 0 select defaults ---- */
typedef struct splitree_scale splitree_scale;

SPLITREE_API splitree_status splitree_scale_create(const splitree_model* m, double q, double h, double x_max,
                                                   splitree_scale** out);
SPLITREE_API void splitree_scale_free(splitree_scale* s);
SPLITREE_API splitree_status splitree_scale_grid(const splitree_scale* s, size_t* size, double* step);
/* W(x), \int_0^x W and G_q(x); x may be +inf for G only. */
SPLITREE_API splitree_status splitree_scale_eval(const splitree_scale* s, double x, double* W, double* int_W,
                                                 double* G);
SPLITREE_API splitree_status splitree_scale_phi_q(const splitree_scale* s, double* out);
/* Numerical Laplace transform of the table at a > phi(q). */
SPLITREE_API splitree_status splitree_scale_laplace(const splitree_scale* s, double a, double* out);
/* P(N_t = n, T > t) for clock rate q = table q (q = 0: law of N_t). */
SPLITREE_API splitree_status splitree_fixed_time_pmf(const splitree_scale* s, double t, size_t n, double* out);

/* ---- detection law at clock rate delta ---- */
typedef struct splitree_law splitree_law;

SPLITREE_API splitree_status splitree_law_create(const splitree_model* m, double delta, double h, double x_max,
                                                 splitree_law** out);
SPLITREE_API void splitree_law_free(splitree_law* l);
SPLITREE_API splitree_status splitree_law_p(const splitree_law* l, double* out);
SPLITREE_API splitree_status splitree_law_phi_delta(const splitree_law* l, double* out);
SPLITREE_API splitree_status splitree_law_pmf_nt(const splitree_law* l, size_t n, int conditional, double* out);
SPLITREE_API splitree_status splitree_law_cdf_t(const splitree_law* l, double y, int conditional, double* out);
SPLITREE_API splitree_status splitree_law_joint_density(const splitree_law* l, size_t n, double t, double* out);
SPLITREE_API splitree_status splitree_law_age_density(const splitree_law* l, double y, double a, double* out);
SPLITREE_API splitree_status splitree_law_age_residual_density(const splitree_law* l, double y, double a, double r,
                                                               double* out);
SPLITREE_API splitree_status splitree_law_age_residual_cell(const splitree_law* l, double y, double a0, double a1,
                                                            double r0, double r1, double* out);

/* ---- tree replicates ---- */
typedef struct splitree_runs splitree_runs;

SPLITREE_API splitree_status splitree_simulate(const splitree_model* m, double delta, size_t reps, uint64_t seed,
                                               unsigned workers, splitree_runs** out);
SPLITREE_API void splitree_runs_free(splitree_runs* r);
SPLITREE_API splitree_status splitree_runs_count(const splitree_runs* r, size_t* out);
/* status: 0 detected, 1 extinct, 2 horizon, 3 capped; T is +inf unless detected. */
SPLITREE_API splitree_status splitree_runs_get(const splitree_runs* r, size_t i, int* status, double* T,
                                               size_t* carriers);
SPLITREE_API splitree_status splitree_runs_carrier(const splitree_runs* r, size_t i, size_t k, double* age,
                                                   double* residual);
/* Stay before infection U; NaN outside epidemic mode. */
SPLITREE_API splitree_status splitree_runs_carrier_stay(const splitree_runs* r, size_t i, size_t k, double* stay);

/* ---- verification batteries ("vervaat" or "laws"); report is JSON ---- */
typedef struct splitree_verify_options {
  size_t reps;
  uint64_t seed;
  unsigned workers; /* 0: all cores */
  double alpha;
  double h;         /* <= 0: default */
  double x_max;     /* <= 0: default */
} splitree_verify_options;

/* Returns SPLITREE_E_VERIFY_FAILED (with the report still written) when a check fails. */
SPLITREE_API splitree_status splitree_verify(const splitree_model* m, double delta, const char* battery,
                                             const splitree_verify_options* opt, char** report_json);

/* ---- epidemic: stay law K, outbreak datasets, estimation ---- */
typedef struct splitree_stay splitree_stay;
typedef struct splitree_dataset splitree_dataset;

SPLITREE_API splitree_status splitree_stay_create(const char* spec, splitree_stay** out);
SPLITREE_API void splitree_stay_free(splitree_stay* k);
SPLITREE_API splitree_status splitree_stay_mean(const splitree_stay* k, double* out);
/* Trees with infective lifetimes P(K > x) / m dx and stays attached to carriers. */
SPLITREE_API splitree_status splitree_simulate_epidemic(const splitree_stay* k, double b, double delta, size_t reps,
                                                        uint64_t seed, unsigned workers, splitree_runs** out);
SPLITREE_API splitree_status splitree_h_density(const splitree_stay* k, double g2, double y, double* out);
SPLITREE_API splitree_status splitree_h_cdf(const splitree_stay* k, double g2, double y, double* out);

SPLITREE_API splitree_status splitree_dataset_read(const char* path, splitree_dataset** out);
SPLITREE_API splitree_status splitree_dataset_write(const splitree_dataset* d, const char* path);
SPLITREE_API splitree_status splitree_dataset_simulate(const splitree_stay* k, double b, double delta, size_t count,
                                                       uint64_t seed, unsigned workers, splitree_dataset** out);
SPLITREE_API void splitree_dataset_free(splitree_dataset* d);
SPLITREE_API splitree_status splitree_dataset_size(const splitree_dataset* d, size_t* outbreaks, size_t* carriers);
SPLITREE_API splitree_status splitree_dataset_log_likelihood(const splitree_dataset* d, const splitree_stay* k,
                                                             double g1, double g2, double* out);

/* Pooled fit; with_intervals != 0 adds profile-likelihood intervals. */
SPLITREE_API splitree_status splitree_fit(const splitree_dataset* d, const splitree_stay* k, int with_intervals,
                                          char** result_json);
/* Common delta across the dataset's hospital column, one K for all. */
SPLITREE_API splitree_status splitree_fit_per_hospital(const splitree_dataset* d, const splitree_stay* k,
                                                       char** result_json);

#ifdef __cplusplus
}
#endif

#endif
