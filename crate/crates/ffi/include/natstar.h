#ifndef NATSTAR_H
#define NATSTAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

#define NS_ENGINE_MOYAL 0

#define NS_ENGINE_CURVILINEAR 1

#define NS_ENGINE_COVARIANT 2

#define NS_ENGINE_FAMILY_A 3

#define NS_ENGINE_FEDOSOV_LIKE 4

/**
 * Jet order used for geometry and star evaluations.
 */
#define NS_JET_ORDER 8

/**
 * Result code of every fallible call.
 */
typedef enum NsStatus {
  NS_STATUS_OK = 0,
  /**
   * Null pointer, bad length, unknown engine, invalid configuration.
   */
  NS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed expression, JSON or TOML.
   */
  NS_STATUS_PARSE_ERROR = 2,
  /**
   * Point outside the chart, singular metric, curved model for a flat-only engine.
   */
  NS_STATUS_DOMAIN_ERROR = 3,
  /**
   * Unknown catalog model or invalid model description.
   */
  NS_STATUS_MODEL_ERROR = 4,
  /**
   * A check report was produced but at least one check failed.
   */
  NS_STATUS_CHECK_FAILED = 5,
  /**
   * Panic or other internal failure.
   */
  NS_STATUS_INTERNAL = 6,
} NsStatus;

/**
 * Opaque metric model.
 */
typedef struct NsModel NsModel;

/**
 * Opaque check report.
 */
typedef struct NsReport NsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *ns_last_error(void);

/**
 * Library version, a static string.
 */
const char *ns_version(void);

/**
 * Looks up a catalog model by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum NsStatus ns_model_catalog(const char *name, struct NsModel **out);

/**
 * Builds a model from a JSON or TOML description with the fields
 * `name`, `dimension`, `variables`, `metric`, `sample_box` and the optional
 * `to_cartesian`, `flat`, `momentum_box`.
 *
 * # Safety
 * `config` must be a NUL-terminated string; `out` must be writable.
 */
enum NsStatus ns_model_from_config(const char *config, struct NsModel **out);

/**
 * # Safety
 * `model` must come from `ns_model_*` and not be used afterwards. Null is ignored.
 */
void ns_model_free(struct NsModel *model);

/**
 * Configuration-space dimension N, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ns_model_dimension(const struct NsModel *model);

/**
 * Christoffel symbols at `x` (length `n`), written as `out[(a*n + b)*n + c] = Γ^a_{bc}`.
 * `out_len` must be at least `n³`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum NsStatus ns_geometry_christoffel(const struct NsModel *model,
                                      const double *x,
                                      size_t n,
                                      double *out,
                                      size_t out_len);

/**
 * Ricci tensor at `x`, row major, `out_len >= n²`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum NsStatus ns_geometry_ricci(const struct NsModel *model,
                                const double *x,
                                size_t n,
                                double *out,
                                size_t out_len);

/**
 * Star-product of two phase-space expressions at `(x, p)`.
 *
 * Writes the value of each ħ^k coefficient at the point as `out[2k] + i·out[2k+1]`
 * for `k = 0..=K`, where K is `hbar_order` clamped to what the engine defines,
 * and stores K + 1 in `*out_terms`. `p` may be null for zero momenta.
 * `out_len` must be at least `2 * (hbar_order + 1)`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; strings NUL-terminated.
 */
enum NsStatus ns_star(const struct NsModel *model,
                      uint32_t engine_code,
                      const char *f,
                      const char *g,
                      const double *x,
                      const double *p,
                      size_t n,
                      size_t hbar_order,
                      double a,
                      double *out,
                      size_t out_len,
                      size_t *out_terms);

/**
 * Like [`ns_star`] but returns the full report (derivatives up to degree 2) as JSON.
 *
 * # Safety
 * Pointers must be valid; `out_json` receives a string to release with `ns_string_free`.
 */
enum NsStatus ns_star_json(const struct NsModel *model,
                           uint32_t engine_code,
                           const char *f,
                           const char *g,
                           const double *x,
                           const double *p,
                           size_t n,
                           size_t hbar_order,
                           double a,
                           char **out_json);

/**
 * Runs the checks described by a TOML or JSON run configuration (same format
 * as the CLI's `--config`). Returns `NS_STATUS_OK` when every check passed,
 * `NS_STATUS_CHECK_FAILED` when some failed; in both cases `*out` receives the report.
 *
 * # Safety
 * `config` must be NUL-terminated; `out` must be writable.
 */
enum NsStatus ns_check_run(const char *config, struct NsReport **out);

/**
 * 1 if every check passed, 0 if not, -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int ns_report_passed(const struct NsReport *report);

/**
 * The report as JSON; release with `ns_string_free`. Null for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
char *ns_report_json(const struct NsReport *report);

/**
 * # Safety
 * `report` must come from `ns_check_run` and not be used afterwards. Null is ignored.
 */
void ns_report_free(struct NsReport *report);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void ns_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NATSTAR_H */
