/* C interface to the owc indoor optical wireless channel simulator. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Call outcome. Anything other than `OK` leaves a message readable via
// `owc_last_error`.
typedef enum OwcStatus {
  OWC_STATUS_OK = 0,
  // A required pointer argument was null.
  OWC_STATUS_NULL_ARGUMENT = 1,
  // Inputs were structurally valid but violate a model rule.
  OWC_STATUS_INVALID_ARGUMENT = 2,
  OWC_STATUS_IO = 3,
  // A file or JSON document could not be parsed.
  OWC_STATUS_PARSE = 4,
  // The assignment problem has no valid solution.
  OWC_STATUS_INFEASIBLE = 5,
  // Unexpected internal failure.
  OWC_STATUS_INTERNAL = 6,
} OwcStatus;

// Receiver front end selector.
typedef enum OwcReceiver {
  // Four-branch angle-diversity receiver.
  OWC_RECEIVER_ADR = 0,
  // 3x3-pixel imaging receiver.
  OWC_RECEIVER_IMR = 1,
} OwcReceiver;

// Opaque channel-database handle.
typedef struct OwcDb OwcDb;

// Opaque allocation-report handle.
typedef struct OwcReport OwcReport;

// Opaque room/scene handle.
typedef struct OwcScene OwcScene;

// One allocated user from an optimization report. `wavelength` indexes
// red = 0, yellow = 1, green = 2, blue = 3.
typedef struct OwcUserRow {
  uint32_t user_id;
  uint32_t ap_id;
  uint32_t wavelength;
  uint32_t element_id;
  double sinr_db;
  double bandwidth_hz;
  double data_rate_bps;
} OwcUserRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library as a static NUL-terminated string.
const char *owc_version(void);

// Copies the current thread's last error message into `buf` (truncated to
// `cap` - 1 bytes, always NUL-terminated when `cap` > 0) and returns the
// full message length in bytes. Call with a null `buf` to query the length.
//
// # Safety
// `buf` must be null or valid for `cap` bytes of writes.
uintptr_t owc_last_error(char *buf, uintptr_t cap);

// Builds the bundled full-resolution reference room.
struct OwcScene *owc_scene_default_room(void);

// Builds the bundled coarse-element room for fast runs.
struct OwcScene *owc_scene_fast_room(void);

// Parses a scene from its JSON form. Returns null on failure (see
// `owc_last_error`).
//
// # Safety
// `json` must be a NUL-terminated string valid for the call.
struct OwcScene *owc_scene_from_json(const char *json);

// # Safety
// `scene` must be null or a pointer from an `owc_scene_*` constructor that
// has not been freed.
void owc_scene_free(struct OwcScene *scene);

// Writes the scene's 64-character hex hash (plus NUL) into `buf`.
//
// # Safety
// `scene` must be a live scene handle; `buf` must be valid for `cap` bytes.
enum OwcStatus owc_scene_hash_hex(const struct OwcScene *scene, char *buf, uintptr_t cap);

// Traces the channel database for every location of the scene.
// `max_order` is the highest reflection order (0..=2), `dt_s` the impulse
// response bin width in seconds (pass 0 for the 10 ps default), `threads`
// the worker count (0 uses all cores).
//
// # Safety
// `scene` must be a live scene handle; `out` must be valid for writes.
enum OwcStatus owc_db_build(const struct OwcScene *scene,
                            enum OwcReceiver receiver,
                            uint32_t max_order,
                            double dt_s,
                            uint32_t threads,
                            struct OwcDb **out);

// Loads a channel database file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid for writes.
enum OwcStatus owc_db_load(const char *path, struct OwcDb **out);

// Persists a channel database.
//
// # Safety
// `db` must be a live database handle; `path` a NUL-terminated string.
enum OwcStatus owc_db_save(const struct OwcDb *db, const char *path);

// # Safety
// `db` must be null or a live database handle.
void owc_db_free(struct OwcDb *db);

// Number of (location, access point, element) records.
//
// # Safety
// `db` must be a live database handle.
uint32_t owc_db_record_count(const struct OwcDb *db);

// DC gain of one channel record (1-based ids).
//
// # Safety
// `db` must be a live database handle; `out` valid for writes.
enum OwcStatus owc_db_dc_gain(const struct OwcDb *db,
                              uint32_t location_id,
                              uint32_t ap_id,
                              uint32_t element_id,
                              double *out);

// 3 dB bandwidth of one channel record. `nyquist_capped` is set when the
// response never falls 3 dB below DC within the representable band.
//
// # Safety
// `db` must be a live database handle; output pointers valid for writes.
enum OwcStatus owc_db_bandwidth(const struct OwcDb *db,
                                uint32_t location_id,
                                uint32_t ap_id,
                                uint32_t element_id,
                                double *f3db_hz,
                                bool *nyquist_capped);

// Solves the allocation problem for the users of a scenario JSON document
// (same schema as the CLI scenario files) against this database.
// `squared_mode` selects the electrical-domain SINR variant.
//
// # Safety
// `db` must be a live database handle; `scenario_json` a NUL-terminated
// string; `out` valid for writes.
enum OwcStatus owc_optimize(const struct OwcDb *db,
                            const char *scenario_json,
                            bool squared_mode,
                            struct OwcReport **out);

// # Safety
// `report` must be null or a live report handle.
void owc_report_free(struct OwcReport *report);

// # Safety
// `report` must be a live report handle.
uint32_t owc_report_user_count(const struct OwcReport *report);

// Sum of per-user linear SINRs (the optimization objective).
//
// # Safety
// `report` must be a live report handle.
double owc_report_objective(const struct OwcReport *report);

// Copies one allocated user (0-based `index`) into `out`.
//
// # Safety
// `report` must be a live report handle; `out` valid for writes.
enum OwcStatus owc_report_user(const struct OwcReport *report,
                               uint32_t index,
                               struct OwcUserRow *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
