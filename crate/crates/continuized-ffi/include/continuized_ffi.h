#ifndef CONTINUIZED_FFI_H
#define CONTINUIZED_FFI_H

/* Generated by cbindgen from the continuized-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a fallible call.
 */
typedef enum CnzStatus {
  /**
   * The call succeeded and every output parameter is filled in.
   */
  CNZ_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CNZ_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument was rejected; the message names it.
   */
  CNZ_STATUS_INVALID_ARGUMENT = 2,
  /**
   * An input or computed quantity was NaN or infinite.
   */
  CNZ_STATUS_NON_FINITE = 3,
  /**
   * An iteration diverged; the message reports the failing step.
   */
  CNZ_STATUS_STEP_FAILED = 4,
  /**
   * A file could not be read.
   */
  CNZ_STATUS_IO_FAILED = 5,
  /**
   * A file was read but could not be understood.
   */
  CNZ_STATUS_PARSE_FAILED = 6,
} CnzStatus;

/**
 * Iteration engine selector for [`cnz_run`].
 */
typedef enum CnzMethod {
  CNZ_METHOD_GD = 0,
  CNZ_METHOD_NESTEROV = 1,
  CNZ_METHOD_CONTINUIZED = 2,
} CnzMethod;

/**
 * Curvature regime selector for [`cnz_run`].
 */
typedef enum CnzRegime {
  CNZ_REGIME_CONVEX = 0,
  CNZ_REGIME_STRONGLY_CONVEX = 1,
} CnzRegime;

/**
 * Opaque handle to an objective function. Create with one of the
 * `cnz_objective_*` constructors, release with [`cnz_objective_free`].
 */
typedef struct CnzObjective CnzObjective;

/**
 * Opaque handle to a completed run. Create with [`cnz_run`], release with
 * [`cnz_trace_free`].
 */
typedef struct CnzTrace CnzTrace;

/**
 * One recorded step of a run.
 *
 * `lyap` carries the tracked potential for the momentum methods and is NaN
 * with `has_lyap` false for plain gradient descent.
 */
typedef struct CnzRecord {
  /**
   * Gradient-step counter, starting at 0 for the initial point.
   */
  uint64_t k;
  /**
   * Continuous time of the step (equals `k` for deterministic methods).
   */
  double t;
  /**
   * Objective gap f(x_k) - f(x_*).
   */
  double f_gap;
  /**
   * Potential value, NaN when `has_lyap` is false.
   */
  double lyap;
  bool has_lyap;
} CnzRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the explanation of the most recent failure on this thread into
 * `buf` as a NUL-terminated string, truncating if `cap` is too small.
 * Returns the full message length in bytes (excluding the NUL); call with a
 * null `buf` or zero `cap` to size a buffer. The message is meaningful only
 * after a call returned a non-`CNZ_STATUS_OK` status.
 *
 * # Safety
 * `buf` must either be null or point to at least `cap` writable bytes.
 */
size_t cnz_last_error_message(char *buf, size_t cap);

/**
 * Creates the 3-dimensional test objective with curvatures `mu`, `3 mu`,
 * and `L`. On success writes a handle to `out`.
 *
 * # Safety
 * `out` must be null or point to a writable `CnzObjective*` slot.
 */
enum CnzStatus cnz_objective_quad3(double mu, double l, struct CnzObjective **out);

/**
 * Creates the 100-dimensional ill-conditioned test objective.
 *
 * # Safety
 * `out` must be null or point to a writable `CnzObjective*` slot.
 */
enum CnzStatus cnz_objective_quad100(struct CnzObjective **out);

/**
 * Loads a diagonal quadratic from a JSON file of the form
 * `{"coeffs": [...], "center": [...]}`.
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or
 * point to a writable `CnzObjective*` slot.
 */
enum CnzStatus cnz_objective_from_json_file(const char *path, struct CnzObjective **out);

/**
 * Releases an objective handle. Null is ignored.
 *
 * # Safety
 * `obj` must be null or a handle from a `cnz_objective_*` constructor that
 * has not been freed yet.
 */
void cnz_objective_free(struct CnzObjective *obj);

/**
 * Dimension of the objective; 0 when `obj` is null.
 *
 * # Safety
 * `obj` must be null or a live objective handle.
 */
size_t cnz_objective_dim(const struct CnzObjective *obj);

/**
 * Smoothness constant L; NaN when `obj` is null.
 *
 * # Safety
 * `obj` must be null or a live objective handle.
 */
double cnz_objective_smoothness(const struct CnzObjective *obj);

/**
 * Strong-convexity constant mu; NaN when `obj` is null.
 *
 * # Safety
 * `obj` must be null or a live objective handle.
 */
double cnz_objective_strong_convexity(const struct CnzObjective *obj);

/**
 * Writes the minimizer into `out`, which must hold `cnz_objective_dim`
 * elements.
 *
 * # Safety
 * `obj` must be null or a live objective handle; `out` must be null or
 * point to `len` writable doubles.
 */
enum CnzStatus cnz_objective_minimizer(const struct CnzObjective *obj, double *out, size_t len);

/**
 * Evaluates the objective at `x` (length `len`) and writes f(x) to `out`.
 *
 * # Safety
 * `obj` must be null or a live objective handle; `x` must be null or point
 * to `len` readable doubles; `out` must be null or writable.
 */
enum CnzStatus cnz_objective_value(const struct CnzObjective *obj,
                                   const double *x,
                                   size_t len,
                                   double *out);

/**
 * Evaluates the objective gap f(x) - f(x_*) and writes it to `out`.
 *
 * # Safety
 * Same contract as [`cnz_objective_value`].
 */
enum CnzStatus cnz_objective_gap(const struct CnzObjective *obj,
                                 const double *x,
                                 size_t len,
                                 double *out);

/**
 * Writes the gradient at `x` into `out`; both buffers hold `len` doubles.
 *
 * # Safety
 * `obj` must be null or a live objective handle; `x` must be null or point
 * to `len` readable doubles; `out` must be null or point to `len` writable
 * doubles not overlapping `x`.
 */
enum CnzStatus cnz_objective_grad(const struct CnzObjective *obj,
                                  const double *x,
                                  size_t len,
                                  double *out);

/**
 * Runs a method for `steps` gradient steps and hands back a trace handle.
 *
 * `sigma_g2` is the per-coordinate variance of additive gradient noise;
 * pass 0 for a noiseless run. `start` may be null, in which case noiseless
 * runs start at the origin and noisy runs at the minimizer; otherwise it
 * must point to `cnz_objective_dim` doubles used as the common initial
 * point. The strongly convex regime requires `mu > 0`.
 *
 * # Safety
 * `obj` must be null or a live objective handle; `start` must be null or
 * point to `cnz_objective_dim(obj)` readable doubles; `out` must be null or
 * point to a writable `CnzTrace*` slot. `method` and `regime` must be
 * values of their enums.
 */
enum CnzStatus cnz_run(const struct CnzObjective *obj,
                       enum CnzMethod method,
                       enum CnzRegime regime,
                       double mu,
                       double l,
                       double sigma_g2,
                       uint64_t seed,
                       size_t steps,
                       const double *start,
                       struct CnzTrace **out);

/**
 * Number of records in the trace (steps + 1); 0 when `trace` is null.
 *
 * # Safety
 * `trace` must be null or a live trace handle.
 */
size_t cnz_trace_len(const struct CnzTrace *trace);

/**
 * Copies record `index` of the trace into `out`.
 *
 * # Safety
 * `trace` must be null or a live trace handle; `out` must be null or point
 * to a writable `CnzRecord`.
 */
enum CnzStatus cnz_trace_record(const struct CnzTrace *trace, size_t index, struct CnzRecord *out);

/**
 * Objective gap of the last record; NaN when `trace` is null or empty.
 *
 * # Safety
 * `trace` must be null or a live trace handle.
 */
double cnz_trace_final_gap(const struct CnzTrace *trace);

/**
 * Releases a trace handle. Null is ignored.
 *
 * # Safety
 * `trace` must be null or a handle from [`cnz_run`] that has not been
 * freed yet.
 */
void cnz_trace_free(struct CnzTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTINUIZED_FFI_H */
