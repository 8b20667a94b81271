#ifndef AVOR_H
#define AVOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Model selector for [`avor_run`].
#define AVOR_MODEL_DRF 0

#define AVOR_MODEL_AVOR 1

// Population selectors for [`avor_run`]. `AVOR_POPULATION_FILE` keeps the
// level stored in the scenario file.
#define AVOR_POPULATION_O 0

#define AVOR_POPULATION_A 1

#define AVOR_POPULATION_AR 2

#define AVOR_POPULATION_FILE 255

typedef enum AvorStatus {
  AVOR_STATUS_OK = 0,
  AVOR_STATUS_NULL_POINTER = 1,
  AVOR_STATUS_INVALID_UTF8 = 2,
  AVOR_STATUS_IO = 3,
  AVOR_STATUS_PARSE = 4,
  AVOR_STATUS_INVALID = 5,
  AVOR_STATUS_NO_CUT_IN = 6,
  AVOR_STATUS_DEGENERATE = 7,
  AVOR_STATUS_INTERNAL = 8,
} AvorStatus;

// Engine, phase and metric configuration.
typedef struct AvorConfig AvorConfig;

// One model's raw risk series.
typedef struct AvorRiskTrace AvorRiskTrace;

// Loaded scenario trace.
typedef struct AvorScenario AvorScenario;

typedef struct AvorPhases {
  double t_phase0_start;
  double t_i_start;
  double t_ii_start;
  double t_iii_start;
  double t_iii_end;
} AvorPhases;

typedef struct AvorCutIn {
  double duration;
  double v_lat_avg;
  double v_lat_max;
  double a_lat_avg;
  double initial_cutin_distance;
} AvorCutIn;

// Vehicle state in the road frame. Heading in radians, speeds in m/s.
typedef struct AvorVehicle {
  double x;
  double y;
  double heading;
  double v_lon;
  double v_lat;
  double length;
  double width;
} AvorVehicle;

typedef struct AvorVcc {
  double x;
  double y;
  double d_vcc;
  double tta;
  // Non-zero when the collision point exists and passes the gates.
  uint8_t valid;
} AvorVcc;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL after a
// successful call. Valid until the next `avor_*` call on the same thread.
const char *avor_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *avor_version(void);

// Default configuration.
//
// # Safety
// `out` must be valid for writes.
enum AvorStatus avor_config_default(struct AvorConfig **out);

// Parse a TOML configuration document. Unset keys keep their defaults.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` valid for writes.
enum AvorStatus avor_config_from_toml(const char *toml, struct AvorConfig **out);

// Load a TOML file (NULL for none) and apply `AVOR_*` environment
// overrides.
//
// # Safety
// `path` must be NULL or a NUL-terminated string; `out` valid for writes.
enum AvorStatus avor_config_load(const char *path, struct AvorConfig **out);

// # Safety
// `cfg` must be NULL or a handle from an `avor_config_*` constructor that
// has not been freed.
void avor_config_free(struct AvorConfig *cfg);

// Load a scenario file. `cfg` may be NULL for defaults.
//
// # Safety
// `path` must be a NUL-terminated string, `cfg` NULL or a live handle and
// `out` valid for writes.
enum AvorStatus avor_scenario_load(const char *path,
                                   const struct AvorConfig *cfg,
                                   struct AvorScenario **out);

// Parse scenario JSON held in memory.
//
// # Safety
// As for [`avor_scenario_load`], with `json` in place of `path`.
enum AvorStatus avor_scenario_parse(const char *json,
                                    const struct AvorConfig *cfg,
                                    struct AvorScenario **out);

// # Safety
// `s` must be NULL or a live scenario handle.
void avor_scenario_free(struct AvorScenario *s);

// # Safety
// `s` must be a live handle and `out` valid for writes.
enum AvorStatus avor_scenario_frame_count(const struct AvorScenario *s, size_t *out);

// Cut-in phase boundaries in seconds.
//
// # Safety
// `s` must be a live handle, `cfg` NULL or a live handle, `out` valid for
// writes.
enum AvorStatus avor_scenario_segment(const struct AvorScenario *s,
                                      const struct AvorConfig *cfg,
                                      struct AvorPhases *out);

// Kinematic summary of the cut-in manoeuvre.
//
// # Safety
// As for [`avor_scenario_segment`].
enum AvorStatus avor_scenario_characterize(const struct AvorScenario *s,
                                           const struct AvorConfig *cfg,
                                           struct AvorCutIn *out);

// Evaluate one model over every frame.
//
// # Safety
// `s` must be a live handle, `cfg` NULL or a live handle, `out` valid for
// writes.
enum AvorStatus avor_run(const struct AvorScenario *s,
                         const struct AvorConfig *cfg,
                         uint32_t model,
                         uint32_t population,
                         struct AvorRiskTrace **out);

// # Safety
// `t` must be NULL or a live risk trace handle.
void avor_risk_trace_free(struct AvorRiskTrace *t);

// Number of samples; 0 for a NULL handle.
//
// # Safety
// `t` must be NULL or a live handle.
size_t avor_risk_trace_len(const struct AvorRiskTrace *t);

// Borrowed pointer to the raw risk values, valid while `t` lives.
//
// # Safety
// `t` must be NULL or a live handle.
const double *avor_risk_trace_values(const struct AvorRiskTrace *t);

// Borrowed pointer to the sample times, valid while `t` lives.
//
// # Safety
// `t` must be NULL or a live handle.
const double *avor_risk_trace_times(const struct AvorRiskTrace *t);

// Virtual collision point of the cut-in vehicle's lateral ray with the
// ego's longitudinal ray. Lateral speeds below `v_lat_min` are gated out.
//
// # Safety
// `ego` and `cutin` must be readable, `out` valid for writes.
enum AvorStatus avor_compute_vcc(const struct AvorVehicle *ego,
                                 const struct AvorVehicle *cutin,
                                 double v_lat_min,
                                 struct AvorVcc *out);

// Min-max normalise `raw` into `[c_bar, c_bar + scale]`, writing `len`
// values to `out`. A non-positive or NaN `scale` selects `10 - c_bar`.
//
// # Safety
// `raw` must be readable and `out` writable for `len` doubles.
enum AvorStatus avor_normalize(const double *raw,
                               size_t len,
                               double c_bar,
                               double scale,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AVOR_H */
