#ifndef EVAC_H
#define EVAC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EvacStatus {
  EVAC_STATUS_OK = 0,
  EVAC_STATUS_NULL_POINTER = 1,
  EVAC_STATUS_INVALID_UTF8 = 2,
  EVAC_STATUS_PARSE = 3,
  EVAC_STATUS_VALIDATION = 4,
  EVAC_STATUS_IO = 5,
  EVAC_STATUS_RUNTIME = 6,
  EVAC_STATUS_TIMEOUT = 7,
  EVAC_STATUS_OUT_OF_RANGE = 8,
  EVAC_STATUS_BUFFER_TOO_SMALL = 9,
  EVAC_STATUS_PANIC = 10,
} EvacStatus;

/**
 * Ranked candidate locations from one optimization.
 */
typedef struct EvacReport EvacReport;

/**
 * Per-agent outcome of one run.
 */
typedef struct EvacRunResult EvacRunResult;

/**
 * A loaded, validated scenario.
 */
typedef struct EvacScenario EvacScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *evac_last_error_message(void);

/**
 * Loads a scenario file, or a bundled scenario by name.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EvacStatus evac_scenario_load(const char *path, struct EvacScenario **out);

/**
 * Parses scenario text.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
enum EvacStatus evac_scenario_parse(const char *source, struct EvacScenario **out);

/**
 * # Safety
 * `scenario` must come from this library and not be freed twice.
 */
void evac_scenario_free(struct EvacScenario *scenario);

/**
 * Number of agents after group expansion; 0 for null.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
size_t evac_scenario_agent_count(const struct EvacScenario *scenario);

/**
 * # Safety
 * `scenario` must be null or a live handle.
 */
size_t evac_scenario_exit_count(const struct EvacScenario *scenario);

/**
 * Seed stored in the scenario file.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
uint64_t evac_scenario_seed(const struct EvacScenario *scenario);

/**
 * Simulates the scenario as written.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum EvacStatus evac_run(const struct EvacScenario *scenario,
                         uint64_t seed,
                         struct EvacRunResult **out);

/**
 * # Safety
 * `result` must come from this library and not be freed twice.
 */
void evac_run_result_free(struct EvacRunResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t evac_run_result_len(const struct EvacRunResult *result);

/**
 * Mean evacuation time in seconds; NaN for null.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double evac_run_result_average_s(const struct EvacRunResult *result);

/**
 * Outcome of agent `index`: duration in ms, exit id and wait count. Any
 * of the output pointers may be null.
 *
 * # Safety
 * `result` must be a live handle; non-null outputs must be writable.
 */
enum EvacStatus evac_run_result_agent(const struct EvacRunResult *result,
                                      size_t index,
                                      uint64_t *duration_ms,
                                      uint32_t *exit_id,
                                      uint32_t *waits);

/**
 * Runs the scenario's `[optimizer]` section. `repeats` and `parallel` of 0
 * mean 1.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum EvacStatus evac_optimize(const struct EvacScenario *scenario,
                              uint64_t seed,
                              uint32_t repeats,
                              uint32_t parallel,
                              struct EvacReport **out);

/**
 * # Safety
 * `report` must come from this library and not be freed twice.
 */
void evac_report_free(struct EvacReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
size_t evac_report_candidate_count(const struct EvacReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
size_t evac_report_best_index(const struct EvacReport *report);

/**
 * Location and average of candidate `index`. Any output may be null.
 *
 * # Safety
 * `report` must be a live handle; non-null outputs must be writable.
 */
enum EvacStatus evac_report_candidate(const struct EvacReport *report,
                                      size_t index,
                                      int32_t *x,
                                      int32_t *y,
                                      double *average_s);

/**
 * Parses `M:S:MS` text into milliseconds.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out_ms` must be writable.
 */
enum EvacStatus evac_parse_duration(const char *source, uint64_t *out_ms);

/**
 * Writes `M:S:MS` text for `ms` into `buf` (NUL-terminated). `needed`,
 * when non-null, receives the buffer size required including the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
enum EvacStatus evac_format_duration(uint64_t ms, char *buf, size_t len, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVAC_H */
