#ifndef BOUNDARY_TRACKING_H
#define BOUNDARY_TRACKING_H

/* Generated by cbindgen from the boundary-tracking-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a fallible call.
typedef enum BtStatus {
  // the call succeeded and output parameters are valid
  BT_STATUS_OK = 0,
  // a required pointer argument was null
  BT_STATUS_NULL_ARGUMENT = 1,
  // a string argument was not valid UTF-8
  BT_STATUS_UTF8 = 2,
  // the scenario text is not valid TOML for the schema
  BT_STATUS_PARSE = 3,
  // the scenario parsed but failed validation (geometry, ranges, ...)
  BT_STATUS_INVALID = 4,
  // the simulation itself failed (order violation, degenerate filter)
  BT_STATUS_RUNTIME = 5,
  // a file could not be written
  BT_STATUS_IO = 6,
  // an internal invariant failed; the library state is still consistent
  BT_STATUS_PANIC = 7,
} BtStatus;

// A parsed-on-demand scenario: TOML text plus validated overrides.
typedef struct BtScenario BtScenario;

// A finished simulation run (per-step records plus the summary).
typedef struct BtTrace BtTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; never freed.
const char *bt_version(void);

// Message describing the most recent failure on this thread. The pointer
// stays valid until the next `bt_*` call on the same thread; never freed
// by the caller.
const char *bt_last_error(void);

// Parse scenario TOML into a new handle. On success `*out` owns the
// scenario and must be released with `bt_scenario_free`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum BtStatus bt_scenario_from_toml(const char *text, struct BtScenario **out);

// Override one scenario key, e.g. key `"run.max_steps"`, value `"200"`.
// The override is validated against the schema immediately and retained
// only if the scenario still parses; on error the scenario is unchanged.
//
// # Safety
// `sc` must come from `bt_scenario_from_toml`; `key` and `value` must be
// NUL-terminated strings.
enum BtStatus bt_scenario_set(struct BtScenario *sc, const char *key, const char *value);

// Release a scenario handle. Null is a no-op.
//
// # Safety
// `sc` must be null or an unreleased pointer from `bt_scenario_from_toml`.
void bt_scenario_free(struct BtScenario *sc);

// Run one simulation. `seed` may be null, in which case the scenario's
// `run.seed` is used, or a fresh seed is drawn if the file has none; a
// non-null `seed` always wins. On success `*out` owns the trace and must
// be released with `bt_trace_free`.
//
// # Safety
// `sc` must come from `bt_scenario_from_toml`; `seed` must be null or
// valid; `out` must be a valid pointer.
enum BtStatus bt_run(const struct BtScenario *sc, const uint64_t *seed, struct BtTrace **out);

// Release a trace handle. Null is a no-op.
//
// # Safety
// `tr` must be null or an unreleased pointer from `bt_run`.
void bt_trace_free(struct BtTrace *tr);

// Number of logged records (initial state plus one per executed step);
// 0 for a null trace.
//
// # Safety
// `tr` must be null or a pointer from `bt_run`.
size_t bt_trace_steps(const struct BtTrace *tr);

// First record index with the convergence error below threshold, or -1
// if the run never converged (or the trace is null).
//
// # Safety
// `tr` must be null or a pointer from `bt_run`.
int64_t bt_trace_ctime(const struct BtTrace *tr);

// Whether the run reached the convergence threshold within its horizon.
//
// # Safety
// `tr` must be null or a pointer from `bt_run`.
bool bt_trace_converged(const struct BtTrace *tr);

// Messages per robot per step up to convergence; NaN for a null trace.
//
// # Safety
// `tr` must be null or a pointer from `bt_run`.
double bt_trace_com_bar(const struct BtTrace *tr);

// Convergence error at record `k`; NaN when `k` is out of range or the
// trace is null.
//
// # Safety
// `tr` must be null or a pointer from `bt_run`.
double bt_trace_cerr_at(const struct BtTrace *tr, size_t k);

// Estimation error at record `k`; NaN when `k` is out of range or the
// trace is null.
//
// # Safety
// `tr` must be null or a pointer from `bt_run`.
double bt_trace_terr_at(const struct BtTrace *tr, size_t k);

// Seed the run was executed with (0 for a null trace).
//
// # Safety
// `tr` must be null or a pointer from `bt_run`.
uint64_t bt_trace_seed(const struct BtTrace *tr);

// Write the per-step trace as CSV to `path` (UTF-8).
//
// # Safety
// `tr` must come from `bt_run`; `path` must be a NUL-terminated string.
enum BtStatus bt_trace_write_csv(const struct BtTrace *tr, const char *path);

// Run summary as a JSON object (steps, ctime, converged, com_bar,
// final_cerr, mean_terr, seed). Returns an owned string to release with
// `bt_string_free`, or null on error.
//
// # Safety
// `tr` must be null or a pointer from `bt_run`.
char *bt_trace_summary_json(const struct BtTrace *tr);

// Release a string returned by this library. Null is a no-op.
//
// # Safety
// `s` must be null or an unreleased string returned by this library.
void bt_string_free(char *s);

// Resolved angular speed bound for the scenario: the fixed value, or the
// worst-case geometric bound when the scenario computes it.
//
// # Safety
// `sc` must come from `bt_scenario_from_toml`; `out` must be valid.
enum BtStatus bt_omega_max(const struct BtScenario *sc, double *out);

// Communication/sensing range feasibility bounds for the scenario's
// polygon and team size: below the necessary bounds the task is
// infeasible, at the sufficient bounds the limited-range strategy is
// guaranteed to work. Any output pointer may be null to skip that value.
//
// # Safety
// `sc` must come from `bt_scenario_from_toml`; non-null outputs must be
// valid pointers.
enum BtStatus bt_range_bounds(const struct BtScenario *sc,
                              double *necessary_rc,
                              double *necessary_rs,
                              double *sufficient_rc,
                              double *sufficient_rs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOUNDARY_TRACKING_H */
