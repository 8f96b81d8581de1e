#ifndef GPR_FFI_H
#define GPR_FFI_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GprStatus {
  GPR_STATUS_OK = 0,
  GPR_STATUS_NULL_POINTER = 1,
  GPR_STATUS_INVALID_ARGUMENT = 2,
  GPR_STATUS_INVALID_DIMENSIONS = 3,
  /**
   * The data cannot be processed: empty, constant, or too sparse.
   */
  GPR_STATUS_INVALID_DATA = 4,
  GPR_STATUS_PANIC = 5,
} GprStatus;

/**
 * Grid of values, row-major with `index = y * lx + x`.
 */
typedef struct GprField GprField;

/**
 * Observation mask; nonzero means observed.
 */
typedef struct GprMask GprMask;

/**
 * Model parameters. New handles hold the modified planar rotator.
 */
typedef struct GprParams GprParams;

typedef struct GprPrediction GprPrediction;

/**
 * Monte Carlo schedule. A NaN `target_acceptance` keeps the proposal width
 * fixed.
 */
typedef struct GprSchedule {
  size_t burn_in;
  size_t averaging;
  double proposal_width;
  double target_acceptance;
  uint64_t seed;
} GprSchedule;

typedef struct GprMetrics {
  double aae;
  double are;
  double aare;
  double rase;
} GprMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *gpr_last_error_message(void);

/**
 * # Safety
 * `values` must point to `len` doubles and `out` must be writable.
 */
enum GprStatus gpr_field_new(size_t lx,
                             size_t ly,
                             const double *values,
                             size_t len,
                             struct GprField **out);

/**
 * # Safety
 * `field` must be null or a handle from this library, freed at most once.
 */
void gpr_field_free(struct GprField *field);

/**
 * # Safety
 * Pointers must be valid; `lx` and `ly` may be null.
 */
enum GprStatus gpr_field_dims(const struct GprField *field, size_t *lx, size_t *ly);

/**
 * Copies the values into `out`, which must hold exactly `lx * ly` doubles.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum GprStatus gpr_field_values(const struct GprField *field, double *out, size_t len);

/**
 * # Safety
 * `observed` must point to `len` bytes and `out` must be writable.
 */
enum GprStatus gpr_mask_new(size_t lx,
                            size_t ly,
                            const uint8_t *observed,
                            size_t len,
                            struct GprMask **out);

/**
 * # Safety
 * `mask` must be null or a handle from this library, freed at most once.
 */
void gpr_mask_free(struct GprMask *mask);

/**
 * # Safety
 * `out` must be writable.
 */
enum GprStatus gpr_params_new(double temperature, struct GprParams **out);

/**
 * # Safety
 * `params` must be null or a handle from this library, freed at most once.
 */
void gpr_params_free(struct GprParams *params);

/**
 * Sets the potential order and shape. `n` and `alpha` accept `INFINITY`.
 * The handle is unchanged on failure.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum GprStatus gpr_params_set_potential(struct GprParams *params, double n, double alpha);

/**
 * # Safety
 * `params` must be a live handle.
 */
enum GprStatus gpr_params_set_couplings(struct GprParams *params, double j_nn, double j_fn);

/**
 * # Safety
 * `params` must be a live handle.
 */
enum GprStatus gpr_params_set_temperature(struct GprParams *params, double temperature);

/**
 * Attraction towards the interpolated bias field; `k = 0` removes the field.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum GprStatus gpr_params_set_bias_field(struct GprParams *params, double k);

/**
 * Uniform field of signed strength; `k_prime = 0` removes the field.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum GprStatus gpr_params_set_uniform_field(struct GprParams *params, double k_prime);

struct GprSchedule gpr_schedule_default(void);

/**
 * Fills the gaps of `sample` where `mask` is zero. Values at gaps are
 * ignored.
 *
 * # Safety
 * Handles must be live, `schedule` readable and `out` writable.
 */
enum GprStatus gpr_predict(const struct GprField *sample,
                           const struct GprMask *mask,
                           const struct GprParams *params,
                           const struct GprSchedule *schedule,
                           struct GprPrediction **out);

/**
 * # Safety
 * `prediction` must be null or a handle from this library, freed at most once.
 */
void gpr_prediction_free(struct GprPrediction *prediction);

/**
 * Number of predicted sites, or 0 for a null handle.
 *
 * # Safety
 * `prediction` must be null or a live handle.
 */
size_t gpr_prediction_len(const struct GprPrediction *prediction);

/**
 * Row-major indices of the predicted sites.
 *
 * # Safety
 * `out` must point to `len` writable values.
 */
enum GprStatus gpr_prediction_sites(const struct GprPrediction *prediction,
                                    size_t *out,
                                    size_t len);

/**
 * Predicted values in the order of [`gpr_prediction_sites`].
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum GprStatus gpr_prediction_values(const struct GprPrediction *prediction,
                                     double *out,
                                     size_t len);

/**
 * Acceptance rate over the averaging sweeps.
 *
 * # Safety
 * `prediction` and `out` must be valid.
 */
enum GprStatus gpr_prediction_acceptance(const struct GprPrediction *prediction, double *out);

/**
 * Copy of `sample` with the gaps replaced by predictions.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum GprStatus gpr_prediction_fill(const struct GprPrediction *prediction,
                                   const struct GprField *sample,
                                   struct GprField **out);

/**
 * Gap filling by biharmonic interpolation alone.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum GprStatus gpr_bias_baseline(const struct GprField *sample,
                                 const struct GprMask *mask,
                                 struct GprField **out);

/**
 * Whittle-Matérn random field; `lognormal` nonzero exponentiates it.
 *
 * # Safety
 * `out` must be writable.
 */
enum GprStatus gpr_generate_field(size_t lx,
                                  size_t ly,
                                  double m,
                                  double sigma,
                                  double nu,
                                  double xi1,
                                  double xi2,
                                  int32_t lognormal,
                                  size_t n_modes,
                                  uint64_t seed,
                                  struct GprField **out);

/**
 * Validation metrics over `len` paired values.
 *
 * # Safety
 * `truth` and `predicted` must point to `len` doubles, `out` must be writable.
 */
enum GprStatus gpr_metrics(const double *truth,
                           const double *predicted,
                           size_t len,
                           struct GprMetrics *out);

/**
 * Pair potential at `c = cos(theta)`. `n` and `alpha` accept
 * `INFINITY`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GprStatus gpr_pair_potential(double c, double n, double alpha, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GPR_FFI_H */
