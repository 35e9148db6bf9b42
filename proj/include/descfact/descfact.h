#ifndef DESCFACT_DESCFACT_H
#define DESCFACT_DESCFACT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DESCFACT_BUILDING)
#define DESCFACT_API __declspec(dllexport)
#else
#define DESCFACT_API __declspec(dllimport)
#endif
#else
#define DESCFACT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* All matrices crossing this interface are dense, row-major. */

typedef enum descfact_status {
  DESCFACT_OK = 0,
  DESCFACT_ERR_INVALID_ARGUMENT = 1,
  DESCFACT_ERR_DIMENSION_MISMATCH = 2,
  DESCFACT_ERR_NON_FINITE_ENTRY = 3,
  DESCFACT_ERR_INVALID_REGION = 4,
  DESCFACT_ERR_SINGULAR_PENCIL = 5,
  DESCFACT_ERR_ITERATION_FAILURE = 6,
  DESCFACT_ERR_SWAP_ILL_CONDITIONED = 7,
  DESCFACT_ERR_BOUNDARY_EIGENVALUE = 8,
  DESCFACT_ERR_SINGULAR_BLOCK = 9,
  DESCFACT_ERR_SINGULAR_AT_POINT = 10,
  DESCFACT_ERR_GAIN_LIMIT_EXCEEDED = 11,
  DESCFACT_ERR_NO_SOLUTION = 12,
  DESCFACT_ERR_INTERNAL = 13
} descfact_status;

typedef enum descfact_domain {
  DESCFACT_CONTINUOUS = 0,
  DESCFACT_DISCRETE = 1
} descfact_domain;

typedef enum descfact_matrix_id {
  DESCFACT_MAT_A = 0,
  DESCFACT_MAT_E = 1,
  DESCFACT_MAT_B = 2,
  DESCFACT_MAT_C = 3,
  DESCFACT_MAT_D = 4
} descfact_matrix_id;

typedef struct descfact_system descfact_system;
typedef struct descfact_factors descfact_factors;
typedef struct descfact_pole_report descfact_pole_report;

/* Options shared by the factorization, pole and verification calls. */
typedef struct descfact_options {
  /* Stability degree for the pole-assignment methods. */
  double alpha;
  /* Target poles (real and imaginary parts), or n_poles = 0. Complex targets
     must come in conjugate pairs. */
  const double* poles_re;
  const double* poles_im;
  size_t n_poles;
  double gain_kappa;
  int strict_gain;
  /* Keep the simple infinite eigenvalues instead of residualizing them. */
  int keep_nondynamic;
  uint64_t seed;
} descfact_options;

/* Defaults: alpha = -0.05 (continuous) or 0.95 (discrete), no target poles,
   gain_kappa = 100, warnings only, non-dynamic modes eliminated, seed 0. */
DESCFACT_API void descfact_options_init(descfact_options* opts,
                                        descfact_domain domain);

/* Message of the last failing call on the calling thread. */
DESCFACT_API const char* descfact_last_error(void);
DESCFACT_API const char* descfact_status_string(descfact_status status);

/* E and D may be NULL (identity and zero). */
DESCFACT_API descfact_status descfact_system_create(
    descfact_domain domain, size_t n, size_t m, size_t p, const double* A,
    const double* E, const double* B, const double* C, const double* D,
    descfact_system** out);
DESCFACT_API void descfact_system_destroy(descfact_system* sys);
DESCFACT_API descfact_status descfact_system_dims(const descfact_system* sys,
                                                  size_t* n, size_t* m,
                                                  size_t* p);
DESCFACT_API descfact_domain descfact_system_domain(const descfact_system* sys);
/* Nonzero when E is the identity marker. */
DESCFACT_API int descfact_system_identity_e(const descfact_system* sys);
/* Copies one matrix into `buf` (rows * cols entries; E is n x n also under the
   identity marker). */
DESCFACT_API descfact_status descfact_system_matrix(const descfact_system* sys,
                                                    descfact_matrix_id which,
                                                    double* buf, size_t len);

/* Right factorizations G = N M^{-1}. */
DESCFACT_API descfact_status descfact_grcf(const descfact_system* sys,
                                           const descfact_options* opts,
                                           descfact_factors** out);
DESCFACT_API descfact_status descfact_grcfid(const descfact_system* sys,
                                             const descfact_options* opts,
                                             descfact_factors** out);
/* Left factorizations G = M^{-1} N. */
DESCFACT_API descfact_status descfact_glcf(const descfact_system* sys,
                                           const descfact_options* opts,
                                           descfact_factors** out);
DESCFACT_API descfact_status descfact_glcfid(const descfact_system* sys,
                                             const descfact_options* opts,
                                             descfact_factors** out);
DESCFACT_API void descfact_factors_destroy(descfact_factors* f);

DESCFACT_API int descfact_factors_is_left(const descfact_factors* f);
DESCFACT_API int descfact_factors_is_inner(const descfact_factors* f);
DESCFACT_API int descfact_factors_denominator_degree(const descfact_factors* f);
/* New handles owned by the caller. */
DESCFACT_API descfact_status descfact_factors_numerator(
    const descfact_factors* f, descfact_system** out);
DESCFACT_API descfact_status descfact_factors_denominator(
    const descfact_factors* f, descfact_system** out);
DESCFACT_API descfact_status descfact_factors_minimal_denominator(
    const descfact_factors* f, descfact_system** out);

typedef struct descfact_step {
  int k;
  int infinite;
  int deflated;
  int gain_warning;
  int reassigned;
  double gain_norm;
  int n_poles;
  double poles_re[2];
  double poles_im[2];
} descfact_step;

DESCFACT_API size_t descfact_factors_step_count(const descfact_factors* f);
DESCFACT_API descfact_status descfact_factors_step(const descfact_factors* f,
                                                   size_t index,
                                                   descfact_step* out);

typedef struct descfact_pole {
  double re;
  double im;
  int controllable;
  int observable;
  int bad;
} descfact_pole;

/* Poles classified against the region of `opts` (stabilize with alpha, or
   assign when target poles are given). */
DESCFACT_API descfact_status descfact_poles(const descfact_system* sys,
                                            const descfact_options* opts,
                                            descfact_pole_report** out);
/* Poles classified against the stability domain. */
DESCFACT_API descfact_status descfact_poles_inner(
    const descfact_system* sys, const descfact_options* opts,
    descfact_pole_report** out);
DESCFACT_API void descfact_pole_report_destroy(descfact_pole_report* r);
DESCFACT_API size_t descfact_pole_report_finite_count(
    const descfact_pole_report* r);
DESCFACT_API descfact_status descfact_pole_report_finite(
    const descfact_pole_report* r, size_t index, descfact_pole* out);
/* Higher-order infinite eigenvalues, the controllable ones among them, and
   simple infinite eigenvalues. */
DESCFACT_API int descfact_pole_report_infinite(const descfact_pole_report* r);
DESCFACT_API int descfact_pole_report_infinite_controllable(
    const descfact_pole_report* r);
DESCFACT_API int descfact_pole_report_nondynamic(const descfact_pole_report* r);
DESCFACT_API int descfact_pole_report_bad_count(const descfact_pole_report* r);

typedef struct descfact_report {
  double reconstruction_error;
  double coprime_ratio;
  /* Negative when the denominator is not checked for innerness. */
  double innerness_error;
  int denominator_order;
  int region_violations;
  int passed;
} descfact_report;

/* Checks G = N M^{-1} (left = 0) or G = M^{-1} N (left = 1). `inner` selects
   the stability domain as region and enables the innerness check. */
DESCFACT_API descfact_status descfact_verify(
    const descfact_system* G, const descfact_system* N,
    const descfact_system* M, int left, int inner,
    const descfact_options* opts, int samples, descfact_report* out);

/* G(lambda), p x m complex, written to out_re / out_im. */
DESCFACT_API descfact_status descfact_eval(const descfact_system* sys,
                                           double lambda_re, double lambda_im,
                                           double* out_re, double* out_im);

#ifdef __cplusplus
}
#endif

#endif
