#ifndef FINSLER_H
#define FINSLER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FinslerStatus {
  FINSLER_STATUS_OK = 0,
  FINSLER_STATUS_NULL_POINTER = 1,
  FINSLER_STATUS_INVALID_UTF8 = 2,
  FINSLER_STATUS_PARSE = 3,
  FINSLER_STATUS_SCHEMA = 4,
  FINSLER_STATUS_VALIDATION = 5,
  FINSLER_STATUS_DOMAIN = 6,
  FINSLER_STATUS_NUMERIC = 7,
  FINSLER_STATUS_UNKNOWN_ID = 8,
  FINSLER_STATUS_INVALID_ARGUMENT = 9,
  FINSLER_STATUS_BUFFER_TOO_SMALL = 10,
  FINSLER_STATUS_PANIC = 11,
} FinslerStatus;

typedef enum FinslerVerdict {
  FINSLER_VERDICT_HOLDS = 0,
  FINSLER_VERDICT_FAILS = 1,
  FINSLER_VERDICT_BORDERLINE = 2,
} FinslerVerdict;

/**
 * Opaque metric handle.
 */
typedef struct FinslerMetric FinslerMetric;

/**
 * Sampling plan, mirroring the CLI's `--seed --samples --eta-samples --radius`.
 */
typedef struct FinslerPlan {
  uint64_t seed;
  uint32_t z_count;
  uint32_t eta_count;
  double radius;
} FinslerPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default plan: seed 42, 8 base points, 8 directions each, radius 0.5.
 */
struct FinslerPlan finsler_plan_default(void);

/**
 * Parses and validates a metric JSON document.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum FinslerStatus finsler_metric_from_json(const char *json, struct FinslerMetric **out);

/**
 * Builds a zoo metric with default parameters.
 *
 * # Safety
 * `id` must be a nul-terminated string; `out` must be writable.
 */
enum FinslerStatus finsler_metric_from_zoo(const char *id, struct FinslerMetric **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `m` must come from this library and not be used afterwards.
 */
void finsler_metric_free(struct FinslerMetric *m);

/**
 * Complex dimension of the metric, 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
uintptr_t finsler_metric_dimension(const struct FinslerMetric *m);

/**
 * The metric re-serialized as JSON.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum FinslerStatus finsler_metric_to_json(const struct FinslerMetric *m, char **out);

/**
 * Full classification report as JSON.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum FinslerStatus finsler_classify_json(const struct FinslerMetric *m,
                                         struct FinslerPlan plan,
                                         double tol,
                                         char **out);

/**
 * Writes one verdict per class into `verdicts` (length `len`, at least 7),
 * in the order kahler, weakly_kahler, landsberg, g_landsberg,
 * strong_landsberg, generalized_berwald, complex_berwald. `inconsistent`
 * is set to 1 when some cross-check disagrees.
 *
 * # Safety
 * `m` must be a live handle; `verdicts` must hold `len` elements;
 * `inconsistent` must be writable or null.
 */
enum FinslerStatus finsler_classify_lattice(const struct FinslerMetric *m,
                                            struct FinslerPlan plan,
                                            double tol,
                                            enum FinslerVerdict *verdicts,
                                            uintptr_t len,
                                            int32_t *inconsistent);

/**
 * Worst residual of an identity suite over the plan, ignoring
 * informational identities.
 *
 * # Safety
 * `m` must be a live handle; `suite` nul-terminated; `out` writable.
 */
enum FinslerStatus finsler_check_suite(const struct FinslerMetric *m,
                                       const char *suite,
                                       struct FinslerPlan plan,
                                       double *out);

/**
 * `g_{i j̄}` at one sample. `sample` holds 4n reals
 * (Re z1, Im z1, ..., Re eta1, Im eta1, ...); `g` receives 2n² reals,
 * row-major with interleaved real and imaginary parts.
 *
 * # Safety
 * `m` must be a live handle; `sample` must hold `sample_len` doubles and
 * `g` must hold `g_len` doubles.
 */
enum FinslerStatus finsler_fundamental_tensor(const struct FinslerMetric *m,
                                              const double *sample,
                                              uintptr_t sample_len,
                                              double *g,
                                              uintptr_t g_len);

/**
 * Every connection coefficient at one sample, as JSON.
 *
 * # Safety
 * `m` must be a live handle; `sample` must hold `sample_len` doubles;
 * `out` must be writable.
 */
enum FinslerStatus finsler_bundle_json(const struct FinslerMetric *m,
                                       const double *sample,
                                       uintptr_t sample_len,
                                       char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void finsler_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *finsler_last_error_message(void);

/**
 * Static name of a status code.
 */
const char *finsler_status_name(enum FinslerStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINSLER_H */
