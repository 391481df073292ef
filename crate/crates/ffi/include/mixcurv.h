#ifndef MIXCURV_H
#define MIXCURV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes. `MIXCURV_STATUS_OK` is zero; everything else is an error.
 */
typedef enum MixcurvStatus {
  MIXCURV_STATUS_OK = 0,
  MIXCURV_STATUS_NULL_POINTER = 1,
  MIXCURV_STATUS_INVALID_UTF8 = 2,
  /*
   Expression syntax or unknown identifier.
   */
  MIXCURV_STATUS_PARSE = 3,
  /*
   Malformed scenario document or chart.
   */
  MIXCURV_STATUS_SCHEMA = 4,
  MIXCURV_STATUS_UNKNOWN_PRESET = 5,
  MIXCURV_STATUS_UNKNOWN_IDENTITY = 6,
  /*
   A hypothesis of the identity fails at the point.
   */
  MIXCURV_STATUS_PRECONDITION = 7,
  MIXCURV_STATUS_NOT_CLOSED = 8,
  /*
   Degenerate metric or distribution, non-finite value.
   */
  MIXCURV_STATUS_NUMERIC = 9,
  /*
   Wrong vector length or other shape problem.
   */
  MIXCURV_STATUS_INVALID_ARGUMENT = 10,
  MIXCURV_STATUS_IO = 11,
  MIXCURV_STATUS_PANIC = 12,
} MixcurvStatus;

/*
 Opaque run report handle.
 */
typedef struct MixcurvReport MixcurvReport;

/*
 Opaque scenario handle.
 */
typedef struct MixcurvScenario MixcurvScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *mixcurv_version(void);

/*
 Message of the last failed call on this thread, or NULL.
 Valid until the next call into this library on the same thread.
 */
const char *mixcurv_last_error_message(void);

/*
 Builds a preset. `params` is NULL or a comma-separated `k=v` list.

 # Safety
 `name` and `params` must be NULL or NUL-terminated strings; `out` must be
 NULL or writable.
 */
enum MixcurvStatus mixcurv_scenario_from_preset(const char *name,
                                                const char *params,
                                                struct MixcurvScenario **out);

/*
 Builds a scenario from a JSON document.

 # Safety
 `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
 */
enum MixcurvStatus mixcurv_scenario_from_json(const char *json, struct MixcurvScenario **out);

/*
 # Safety
 `h` must be NULL or a handle from this library not yet freed.
 */
void mixcurv_scenario_free(struct MixcurvScenario *h);

/*
 Total dimension and rank of `D⊤`.

 # Safety
 `h` must be a live scenario handle; outputs must be NULL or writable.
 */
enum MixcurvStatus mixcurv_scenario_dims(const struct MixcurvScenario *h,
                                         size_t *out_dim,
                                         size_t *out_n);

/*
 `S_mix` and `S̄_mix` at a point.

 # Safety
 `x` must point to `len` doubles; outputs must be NULL or writable.
 */
enum MixcurvStatus mixcurv_mixed_scalar_curvatures(const struct MixcurvScenario *h,
                                                   const double *x,
                                                   size_t len,
                                                   double *out_s_mix,
                                                   double *out_bar_s_mix);

/*
 Both sides of an identity's pointwise form at `x`.

 # Safety
 `id` must be a NUL-terminated string, `x` must point to `len` doubles;
 outputs must be NULL or writable.
 */
enum MixcurvStatus mixcurv_evaluate_pointwise(const struct MixcurvScenario *h,
                                              const char *id,
                                              const double *x,
                                              size_t len,
                                              double *out_lhs,
                                              double *out_rhs);

/*
 Runs the identity suite. `identity` NULL means all identities.

 # Safety
 `h` must be a live scenario handle, `identity` NULL or a NUL-terminated
 string, `out` NULL or writable.
 */
enum MixcurvStatus mixcurv_check(const struct MixcurvScenario *h,
                                 const char *identity,
                                 size_t grid,
                                 double tol,
                                 struct MixcurvReport **out);

/*
 1 when every evaluated identity passed, 0 otherwise, -1 for NULL.

 # Safety
 `r` must be NULL or a live report handle.
 */
int mixcurv_report_passed(const struct MixcurvReport *r);

/*
 The report as JSON, newly allocated; release with [`mixcurv_string_free`].
 NULL on a NULL handle.

 # Safety
 `r` must be NULL or a live report handle.
 */
char *mixcurv_report_json(const struct MixcurvReport *r);

/*
 # Safety
 `r` must be NULL or a report handle not yet freed.
 */
void mixcurv_report_free(struct MixcurvReport *r);

/*
 # Safety
 `s` must be NULL or a string returned by this library, not yet freed.
 */
void mixcurv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXCURV_H */
