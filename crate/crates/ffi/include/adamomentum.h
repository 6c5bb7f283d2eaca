#ifndef ADAMOMENTUM_H
#define ADAMOMENTUM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AmStatus {
  AM_STATUS_OK = 0,
  AM_STATUS_NULL_POINTER = 1,
  AM_STATUS_INVALID_ARGUMENT = 2,
  AM_STATUS_SHAPE_MISMATCH = 3,
  AM_STATUS_NON_FINITE = 4,
  AM_STATUS_INVALID_STATE = 5,
  AM_STATUS_PANIC = 6,
} AmStatus;

typedef enum AmOptimizerKind {
  AM_OPTIMIZER_KIND_ADAMOMENTUM = 0,
  AM_OPTIMIZER_KIND_ADAM = 1,
  AM_OPTIMIZER_KIND_ADAMW = 2,
  AM_OPTIMIZER_KIND_RMSPROP = 3,
  AM_OPTIMIZER_KIND_RPROP = 4,
  AM_OPTIMIZER_KIND_ADABELIEF = 5,
  AM_OPTIMIZER_KIND_SGD = 6,
} AmOptimizerKind;

/**
 * Opaque optimizer handle.
 */
typedef struct AmOptimizer AmOptimizer;

/**
 * Constant-schedule hyperparameters.
 */
typedef struct AmHyperParams {
  double alpha;
  double beta1;
  double beta2;
  double epsilon;
  double weight_decay;
  /**
   * Nonzero: decay applied to the weights directly instead of added to the gradient.
   */
  uint8_t decoupled_decay;
} AmHyperParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last non-OK status on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *am_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *am_version(void);

/**
 * # Safety
 * `out` must be null or point to writable memory for one `AmHyperParams`.
 */
enum AmStatus am_hyper_defaults(enum AmOptimizerKind kind, struct AmHyperParams *out);

/**
 * Creates an optimizer for `dim` parameters. `hyper` may be null to use the
 * defaults for `kind`.
 *
 * # Safety
 * `hyper` must be null or valid for reads; `out` must be valid for one write.
 */
enum AmStatus am_optimizer_new(enum AmOptimizerKind kind,
                               const struct AmHyperParams *hyper,
                               size_t dim,
                               struct AmOptimizer **out);

/**
 * # Safety
 * `handle` must come from [`am_optimizer_new`] and not be used afterwards.
 */
void am_optimizer_free(struct AmOptimizer *handle);

/**
 * Applies one update in place. On error `params` is left unchanged.
 *
 * # Safety
 * `params` and `grad` must each point to `len` valid doubles.
 */
enum AmStatus am_optimizer_step(struct AmOptimizer *handle,
                                double *params,
                                const double *grad,
                                size_t len);

/**
 * Writes the per-coordinate effective stepsize of the most recent step.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum AmStatus am_optimizer_effective_stepsize(const struct AmOptimizer *handle,
                                              double *out,
                                              size_t len);

/**
 * Steps taken so far; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
uint64_t am_optimizer_step_count(const struct AmOptimizer *handle);

/**
 * Clears the moments and the step counter, keeping the hyperparameters.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
enum AmStatus am_optimizer_reset(struct AmOptimizer *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADAMOMENTUM_H */
