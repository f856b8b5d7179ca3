/*
 * pretestcov: coverage of stratum-specific odds-ratio confidence intervals
 * after a preliminary test of homogeneity.
 *
 * C interface. Every function returning ptc_status reports failures through
 * the status code; a description of the most recent failure on the calling
 * thread is available from ptc_last_error(). Opaque objects created by a
 * *_create or computing function are released with the matching
 * *_destroy function. Log odds ratios are on the natural-log scale.
 */
#ifndef PRETESTCOV_H
#define PRETESTCOV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PRETESTCOV_BUILDING)
#    define PTC_API __declspec(dllexport)
#  else
#    define PTC_API __declspec(dllimport)
#  endif
#else
#  define PTC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ptc_status {
  PTC_OK = 0,
  PTC_ERR_INVALID_ARGUMENT = 1, /* input outside the operation's domain */
  PTC_ERR_NUMERICAL = 2,        /* quadrature failed to converge */
  PTC_ERR_BUDGET_EXCEEDED = 3,  /* enumeration larger than the outcome budget */
  PTC_ERR_NULL_POINTER = 4,
  PTC_ERR_INTERNAL = 5
} ptc_status;

typedef enum ptc_mode {
  PTC_MODE_TWO_STAGE = 0, /* homogeneity pretest, then pooled or separate */
  PTC_MODE_NO_PRETEST = 1 /* separate intervals always */
} ptc_mode;

/* Cases and controls per stratum: n1, n1', n2, n2'. */
typedef struct ptc_design {
  int64_t n1, n1p, n2, n2p;
} ptc_design;

/* Exposure probabilities p1, p1', p2, p2'. */
typedef struct ptc_probs {
  double p1, p1p, p2, p2p;
} ptc_probs;

/* Exposed counts y1, y1', y2, y2'. */
typedef struct ptc_tables {
  int64_t y1, y1p, y2, y2p;
} ptc_tables;

typedef struct ptc_interval {
  double lo, hi;
  int empty;
} ptc_interval;

typedef struct ptc_woolf {
  double theta_hat1, theta_hat2;
  double sigma_hat_sq1, sigma_hat_sq2;
  double t_hat;
  double theta_hat_pooled;
} ptc_woolf;

typedef struct ptc_intervals {
  ptc_interval theta1, theta2;
  int rejected; /* 1: separate intervals, 0: pooled interval for both */
} ptc_intervals;

typedef struct ptc_mc_estimate {
  double coverage;
  double std_err;
  uint64_t reps;
  uint64_t seed;
} ptc_mc_estimate;

typedef struct ptc_geometry {
  double delta_cap, r, delta_cap_prime;
  double p1_lo, p1_hi, p1p_lo, p1p_hi;
} ptc_geometry;

typedef struct ptc_partial_min {
  double coverage;
  double argmin_delta;
} ptc_partial_min;

/* Snapshot of a configuration's values. */
typedef struct ptc_config_values {
  double alpha, beta, epsilon, grid_step;
  uint64_t stage1_reps, stage2_reps, stage3_reps;
  uint64_t keep;
  uint64_t seed;
  unsigned workers;
  double quad_abs_tol, quad_rel_tol;
  int quad_max_subdivisions;
  uint64_t enumeration_budget;
  uint64_t delta_steps;
} ptc_config_values;

/* ---- library ---------------------------------------------------------- */

PTC_API const char* ptc_version(void);
PTC_API const char* ptc_status_string(ptc_status status);
/* Message for the last failing call on this thread ("" if none). */
PTC_API const char* ptc_last_error(void);

/* ---- configuration ----------------------------------------------------- */

typedef struct ptc_config ptc_config;

/* Defaults: alpha = beta = 0.05, epsilon = 0.02, grid step 0.096,
 * schedule 10000 / 200000 / 1000000 keeping 10, quadrature abs tol 1e-9,
 * enumeration budget 1e7 outcomes, 80 delta steps, workers = all cores. */
PTC_API ptc_status ptc_config_create(ptc_config** out);
PTC_API void ptc_config_destroy(ptc_config* config);
PTC_API ptc_status ptc_config_get(const ptc_config* config, ptc_config_values* out);

PTC_API ptc_status ptc_config_set_alpha(ptc_config* config, double alpha);
/* beta in [0, 1]; 0 is accepted only by the large-sample evaluators. */
PTC_API ptc_status ptc_config_set_beta(ptc_config* config, double beta);
PTC_API ptc_status ptc_config_set_epsilon(ptc_config* config, double epsilon);
PTC_API ptc_status ptc_config_set_grid_step(ptc_config* config, double h);
PTC_API ptc_status ptc_config_set_schedule(ptc_config* config, uint64_t stage1_reps,
                                           uint64_t stage2_reps, uint64_t stage3_reps,
                                           uint64_t keep);
PTC_API ptc_status ptc_config_set_seed(ptc_config* config, uint64_t seed);
/* 0 selects one worker per hardware thread. Results never depend on it. */
PTC_API ptc_status ptc_config_set_workers(ptc_config* config, unsigned workers);
PTC_API ptc_status ptc_config_set_quadrature(ptc_config* config, double abs_tol,
                                             double rel_tol, int max_subdivisions);
PTC_API ptc_status ptc_config_set_enumeration_budget(ptc_config* config,
                                                     uint64_t max_outcomes);
PTC_API ptc_status ptc_config_set_delta_steps(ptc_config* config, uint64_t steps);

/* ---- sample statistics ------------------------------------------------- */

/* out[4] = adjusted proportions (y + 1/2)/(n + 1). */
PTC_API ptc_status ptc_adjusted_props(ptc_design design, ptc_tables tables,
                                      double out[4]);
PTC_API ptc_status ptc_woolf_summary(ptc_design design, ptc_tables tables,
                                     ptc_woolf* out);
PTC_API ptc_status ptc_normal_quantiles(double alpha, double beta, double* c_alpha,
                                        double* c_tilde_alpha, double* c_beta);
PTC_API ptc_status ptc_two_stage_intervals(const ptc_config* config, ptc_design design,
                                           ptc_tables tables, ptc_intervals* out);

/* ---- coverage at one parameter point ------------------------------------ */

PTC_API ptc_status ptc_mc_coverage(const ptc_config* config, ptc_design design,
                                   ptc_probs p, ptc_mode mode, uint64_t reps,
                                   uint64_t seed, ptc_mc_estimate* out);
PTC_API ptc_status ptc_enumerate_coverage(const ptc_config* config, ptc_design design,
                                          ptc_probs p, ptc_mode mode, double* out);
/* Large-sample coverage. abs_error (may be NULL) receives the quadrature
 * error estimate (0 when no quadrature was needed). */
PTC_API ptc_status ptc_asymptotic_coverage(const ptc_config* config, ptc_design design,
                                           ptc_probs p, ptc_mode mode, double* out,
                                           double* abs_error);

/* ---- minimum coverage over the grid ------------------------------------ */

typedef struct ptc_search ptc_search;

PTC_API ptc_status ptc_search_min_mc(const ptc_config* config, ptc_design design,
                                     ptc_mode mode, ptc_search** out);
PTC_API ptc_status ptc_search_min_asymptotic(const ptc_config* config,
                                             ptc_design design, ptc_mode mode,
                                             ptc_search** out);
PTC_API void ptc_search_destroy(ptc_search* search);

PTC_API double ptc_search_min_value(const ptc_search* search);
/* Monte Carlo: 1. Large-sample: every grid point within the tie band. */
PTC_API size_t ptc_search_argmin_count(const ptc_search* search);
PTC_API ptc_status ptc_search_argmin(const ptc_search* search, size_t index,
                                     ptc_probs* out);
PTC_API double ptc_search_tie_band(const ptc_search* search);
PTC_API uint64_t ptc_search_points_evaluated(const ptc_search* search);
/* Monte Carlo stage trace (0 stages for the large-sample search). */
PTC_API size_t ptc_search_stage_count(const ptc_search* search);
PTC_API uint64_t ptc_search_stage_reps(const ptc_search* search, size_t stage);
PTC_API uint64_t ptc_search_stage_evaluated(const ptc_search* search, size_t stage);
PTC_API size_t ptc_search_stage_candidate_count(const ptc_search* search, size_t stage);
PTC_API ptc_status ptc_search_stage_candidate(const ptc_search* search, size_t stage,
                                              size_t index, ptc_probs* p,
                                              ptc_mc_estimate* estimate);
/* Large-sample grid points where quadrature failed. */
PTC_API size_t ptc_search_failure_count(const ptc_search* search);
PTC_API ptc_status ptc_search_failure(const ptc_search* search, size_t index,
                                      ptc_probs* p, const char** message);

/* ---- interior scan ----------------------------------------------------- */

PTC_API ptc_status ptc_scan_geometry(ptc_design design, double epsilon,
                                     ptc_geometry* out);
PTC_API ptc_status ptc_partial_min_coverage(const ptc_config* config, ptc_design design,
                                            double p1, double p1p, ptc_partial_min* out);
PTC_API ptc_status ptc_lambda_taylor(ptc_design design, double p1, double p1p,
                                     double delta, double* out);

typedef struct ptc_contour ptc_contour;

/* (grid_steps + 1) x (grid_steps + 1) grid over the scan rectangle. */
PTC_API ptc_status ptc_contour_grid(const ptc_config* config, ptc_design design,
                                    size_t grid_steps, ptc_contour** out);
PTC_API void ptc_contour_destroy(ptc_contour* contour);
PTC_API size_t ptc_contour_rows(const ptc_contour* contour); /* p1 values */
PTC_API size_t ptc_contour_cols(const ptc_contour* contour); /* p1' values */
PTC_API double ptc_contour_p1(const ptc_contour* contour, size_t row);
PTC_API double ptc_contour_p1p(const ptc_contour* contour, size_t col);
PTC_API double ptc_contour_value(const ptc_contour* contour, size_t row, size_t col);
PTC_API double ptc_contour_argmin_delta(const ptc_contour* contour, size_t row,
                                        size_t col);

/* Partial minimum at (p1, p1') for each design factors[i] * design. Points
 * outside a scaled rectangle get evaluated[i] = 0 and NaN outputs. */
PTC_API ptc_status ptc_scaling_study(const ptc_config* config, ptc_design design,
                                     const int64_t* factors, size_t count, double p1,
                                     double p1p, double* coverage, double* argmin_delta,
                                     int* evaluated);

#ifdef __cplusplus
}
#endif

#endif /* PRETESTCOV_H */
