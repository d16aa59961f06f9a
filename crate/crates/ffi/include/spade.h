#ifndef SPADE_H
#define SPADE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SpadeStatus {
  SPADE_STATUS_OK = 0,
  SPADE_STATUS_INVALID_ARGUMENT = 1,
  SPADE_STATUS_NULL_POINTER = 2,
  SPADE_STATUS_SHAPE_MISMATCH = 3,
  SPADE_STATUS_NUMERICAL = 4,
  SPADE_STATUS_PANIC = 5,
} SpadeStatus;

/**
 * Opaque mode-sorting model.
 */
typedef struct SpadeModel SpadeModel;

/**
 * Maximum-likelihood estimate. Flags are 0 or 1.
 */
typedef struct SpadeEstimate {
  double d_hat;
  double delta_hat;
  double log_likelihood;
  double crlb_variance;
  uint8_t boundary_hit;
  uint8_t flat;
  uint8_t converged;
} SpadeEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *spade_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into the library from the same thread.
 */
const char *spade_last_error(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SpadeStatus spade_schmidt_number(double gamma, double *out);

/**
 * Small-separation information summed over all modes, split into branches.
 *
 * # Safety
 * `up` and `down` must be valid for writes.
 */
enum SpadeStatus spade_fi_total_2d(double gamma, double *up, double *down);

/**
 * As [`spade_fi_total_2d`] restricted to the ground mode along y.
 *
 * # Safety
 * `up` and `down` must be valid for writes.
 */
enum SpadeStatus spade_fi_total_1d(double gamma, double *up, double *down);

/**
 * Variance bound `2/(n sqrt(K))` on the total separation.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SpadeStatus spade_crlb(double schmidt_number, double photons, double *out);

/**
 * Overlap of mode `m` with mode `n` displaced by `sign * d` (`sign` is +1 or -1).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SpadeStatus spade_displaced_overlap(size_t m, size_t n, double d, int32_t sign, double *out);

/**
 * Creates a model over the mode grid `k <= max_k`, `l <= max_l` for both photons.
 *
 * # Safety
 * `out` must be valid for writes. The handle must be released with
 * [`spade_model_free`].
 */
enum SpadeStatus spade_model_new(double gamma, size_t max_k, size_t max_l, struct SpadeModel **out);

/**
 * # Safety
 * `model` must come from [`spade_model_new`] and not be used afterwards.
 * Null is ignored.
 */
void spade_model_free(struct SpadeModel *model);

/**
 * Number of projections (idler modes times signal modes); 0 for null.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t spade_model_outcome_count(const struct SpadeModel *model);

/**
 * Attaches per-projection gain `alpha` and background `beta`, each of
 * length `len` equal to the outcome count.
 *
 * # Safety
 * `model` must be a live handle; `alpha` and `beta` must point to `len` values.
 */
enum SpadeStatus spade_model_set_calibration(struct SpadeModel *model,
                                             const double *alpha,
                                             const double *beta,
                                             size_t len);

/**
 * Projection probabilities at per-arm shift `d`, row-major by idler mode.
 *
 * # Safety
 * `model` must be a live handle; `out` must have room for `len` values.
 */
enum SpadeStatus spade_model_probabilities(const struct SpadeModel *model,
                                           double d,
                                           double *out,
                                           size_t len);

/**
 * Per-photon Fisher information for the total separation at shift `d`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
enum SpadeStatus spade_model_fisher(const struct SpadeModel *model, double d, double *out);

/**
 * Draws `photons` outcomes at shift `d`; deterministic in `seed`.
 *
 * # Safety
 * `model` must be a live handle; `out` must have room for `len` values.
 */
enum SpadeStatus spade_model_sample(const struct SpadeModel *model,
                                    double d,
                                    uint64_t photons,
                                    uint64_t seed,
                                    uint64_t *out,
                                    size_t len);

/**
 * Maximum-likelihood per-arm shift on `[lo, hi]`.
 *
 * # Safety
 * `model` must be a live handle; `counts` must point to `len` values and
 * `out` must be valid for writes.
 */
enum SpadeStatus spade_model_estimate(const struct SpadeModel *model,
                                      const uint64_t *counts,
                                      size_t len,
                                      double lo,
                                      double hi,
                                      struct SpadeEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPADE_H */
