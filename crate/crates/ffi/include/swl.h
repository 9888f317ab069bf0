#ifndef SWL_H
#define SWL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SwlBasis {
  SWL_BASIS_HAAR = 0,
  SWL_BASIS_EXPONENTIAL = 1,
} SwlBasis;

typedef enum SwlSign {
  SWL_SIGN_PLUS = 0,
  SWL_SIGN_MINUS = 1,
} SwlSign;

typedef enum SwlStatus {
  SWL_STATUS_OK = 0,
  SWL_STATUS_NULL_POINTER = 1,
  SWL_STATUS_INVALID_ARGUMENT = 2,
  SWL_STATUS_INVALID_LABEL = 3,
  SWL_STATUS_PARSE = 4,
  SWL_STATUS_UNBOUNDED_SUPPORT = 5,
  SWL_STATUS_QUADRATURE_NOT_CONVERGED = 6,
  SWL_STATUS_K_RANGE_TOO_SMALL = 7,
  SWL_STATUS_GRID_MISMATCH = 8,
  SWL_STATUS_OUTSIDE_SLICE = 9,
  SWL_STATUS_NUMERICAL = 10,
  SWL_STATUS_IO = 11,
  SWL_STATUS_PANIC = 12,
} SwlStatus;

typedef enum SwlVerdict {
  SWL_VERDICT_PASS = 0,
  SWL_VERDICT_FAIL = 1,
  SWL_VERDICT_INCONCLUSIVE = 2,
} SwlVerdict;

/**
 * Translation-model coordinates.
 */
typedef struct SwlFCoords SwlFCoords;

/**
 * Dilation-model coordinates.
 */
typedef struct SwlGCoords SwlGCoords;

typedef struct SwlReport SwlReport;

/**
 * Inclusive index ranges of both models.
 */
typedef struct SwlWindow {
  int64_t trans_label_lo;
  int64_t trans_label_hi;
  int64_t n_lo;
  int64_t n_hi;
  int64_t dil_label_lo;
  int64_t dil_label_hi;
  int64_t m_lo;
  int64_t m_hi;
} SwlWindow;

typedef struct SwlComplex {
  double re;
  double im;
} SwlComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *swl_last_error(void);

/**
 * Symmetric window of radius `radius`; `m_max >= 0` overrides the dilation range.
 */
enum SwlStatus swl_window_symmetric(enum SwlBasis basis,
                                    int64_t radius,
                                    int64_t m_max,
                                    struct SwlWindow *out);

/**
 * `α_{i,n}^{s,j,m}`.
 */
enum SwlStatus swl_alpha_entry(enum SwlBasis basis,
                               int64_t i,
                               int64_t n,
                               enum SwlSign s,
                               int64_t j,
                               int64_t m,
                               struct SwlComplex *out);

struct SwlFCoords *swl_fcoords_new(void);

void swl_fcoords_free(struct SwlFCoords *v);

enum SwlStatus swl_fcoords_set(struct SwlFCoords *v, int64_t i, int64_t n, struct SwlComplex c);

enum SwlStatus swl_fcoords_get(const struct SwlFCoords *v,
                               int64_t i,
                               int64_t n,
                               struct SwlComplex *out);

/**
 * Number of stored entries; 0 for a null handle.
 */
uintptr_t swl_fcoords_len(const struct SwlFCoords *v);

/**
 * Entry `k` in index order.
 */
enum SwlStatus swl_fcoords_entry(const struct SwlFCoords *v,
                                 uintptr_t k,
                                 int64_t *i,
                                 int64_t *n,
                                 struct SwlComplex *out);

double swl_fcoords_norm_sq(const struct SwlFCoords *v);

struct SwlGCoords *swl_gcoords_new(void);

void swl_gcoords_free(struct SwlGCoords *v);

enum SwlStatus swl_gcoords_set(struct SwlGCoords *v,
                               enum SwlSign s,
                               int64_t j,
                               int64_t m,
                               struct SwlComplex c);

enum SwlStatus swl_gcoords_get(const struct SwlGCoords *v,
                               enum SwlSign s,
                               int64_t j,
                               int64_t m,
                               struct SwlComplex *out);

uintptr_t swl_gcoords_len(const struct SwlGCoords *v);

enum SwlStatus swl_gcoords_entry(const struct SwlGCoords *v,
                                 uintptr_t k,
                                 enum SwlSign *s,
                                 int64_t *j,
                                 int64_t *m,
                                 struct SwlComplex *out);

double swl_gcoords_norm_sq(const struct SwlGCoords *v);

/**
 * Dilation coordinates from translation coordinates. `tail_sq` may be null.
 */
enum SwlStatus swl_g_from_f(enum SwlBasis basis,
                            const struct SwlFCoords *v,
                            const struct SwlWindow *w,
                            struct SwlGCoords **out,
                            double *tail_sq);

/**
 * Translation coordinates from dilation coordinates. `tail_sq` may be null.
 */
enum SwlStatus swl_f_from_g(enum SwlBasis basis,
                            const struct SwlGCoords *v,
                            const struct SwlWindow *w,
                            struct SwlFCoords **out,
                            double *tail_sq);

/**
 * Translation coordinates of the function described by `spec` (text form), by direct integration.
 */
enum SwlStatus swl_oracle_f_coords(const char *spec,
                                   enum SwlBasis basis,
                                   const struct SwlWindow *w,
                                   struct SwlFCoords **out,
                                   double *tail_sq);

/**
 * Dilation coordinates of the function described by `spec`, by direct integration.
 */
enum SwlStatus swl_oracle_g_coords(const char *spec,
                                   enum SwlBasis basis,
                                   const struct SwlWindow *w,
                                   struct SwlGCoords **out,
                                   double *tail_sq);

/**
 * `D^p T^q f` (`td == 0`) or `T^q D^p f` (`td != 0`) in translation coordinates.
 */
enum SwlStatus swl_act_on_f(enum SwlBasis basis,
                            const struct SwlFCoords *v,
                            int64_t p,
                            int64_t q,
                            int32_t td,
                            const struct SwlWindow *w,
                            struct SwlFCoords **out,
                            double *tail_sq);

/**
 * `D^p T^q f` (`td == 0`) or `T^q D^p f` (`td != 0`) in dilation coordinates.
 */
enum SwlStatus swl_act_on_g(enum SwlBasis basis,
                            const struct SwlGCoords *v,
                            int64_t p,
                            int64_t q,
                            int32_t td,
                            const struct SwlWindow *w,
                            struct SwlGCoords **out,
                            double *tail_sq);

/**
 * Orthonormality over `|p|, |q| <= pq` and the completeness rank test with
 * columns `(signs[k], labels[k])`.
 */
enum SwlStatus swl_check_wavelet(enum SwlBasis basis,
                                 const struct SwlGCoords *psi,
                                 int64_t pq,
                                 int64_t rank_radius,
                                 const enum SwlSign *signs,
                                 const int64_t *labels,
                                 uintptr_t f_len,
                                 const struct SwlWindow *w,
                                 double tol,
                                 double rank_threshold,
                                 struct SwlReport **out);

/**
 * Autocorrelation identity of integer translates for lags `|k| <= k_max`.
 */
enum SwlStatus swl_check_scaling(const struct SwlFCoords *phi,
                                 int64_t k_max,
                                 double tol,
                                 struct SwlReport **out);

void swl_report_free(struct SwlReport *r);

enum SwlStatus swl_report_verdict(const struct SwlReport *r, enum SwlVerdict *out);

double swl_report_max_residual(const struct SwlReport *r);

/**
 * Report as canonical JSON; release with [`swl_string_free`].
 */
enum SwlStatus swl_report_json(const struct SwlReport *r, char **out);

/**
 * Mirror filter of a JSON `{"k": [re, im]}` map; result in the same format.
 */
enum SwlStatus swl_mirror_filter_json(const char *filter_json, int64_t m, char **out);

void swl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWL_H */
