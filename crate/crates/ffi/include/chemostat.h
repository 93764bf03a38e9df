#ifndef CHEMOSTAT_H
#define CHEMOSTAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Status codes. The first four match the command-line exit codes.
 */
typedef enum ChmStatus {
  CHM_STATUS_OK = 0,
  /*
   Invalid parameters, configuration or arguments.
   */
  CHM_STATUS_CONFIG = 1,
  /*
   The integrator produced a negative or non-finite state.
   */
  CHM_STATUS_BLOWUP = 2,
  /*
   A closed-form quantity could not be evaluated.
   */
  CHM_STATUS_ANALYSIS = 3,
  CHM_STATUS_NULL_POINTER = 4,
  CHM_STATUS_INVALID_UTF8 = 5,
  /*
   Output buffer too small; nothing was written.
   */
  CHM_STATUS_BUFFER_TOO_SMALL = 6,
  CHM_STATUS_PANIC = 7,
} ChmStatus;

/*
 Opaque sampled noise path.
 */
typedef struct ChmNoise ChmNoise;

/*
 Opaque parameter set.
 */
typedef struct ChmParams ChmParams;

/*
 Opaque integrated trajectory.
 */
typedef struct ChmTrajectory ChmTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failing call on this thread, or NULL. The pointer is
 valid until the next failing call on the same thread.
 */
const char *chm_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *chm_version(void);

/*
 Free a string returned by the library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void chm_string_free(char *s);

/*
 Parse a parameter set from its JSON object form
 (`{"s_in": .., "D": .., ..., "kinetics": {"type": "monod", "k": ..}}`).

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ChmStatus chm_params_from_json(const char *json, struct ChmParams **out);

/*
 Reference parameter set `figure` (1 to 4).

 # Safety
 `out` must be writable.
 */
enum ChmStatus chm_params_figure(uint8_t figure, struct ChmParams **out);

/*
 Serialize parameters to JSON; free the result with [`chm_string_free`].

 # Safety
 `params` must be a live handle; `out` must be writable.
 */
enum ChmStatus chm_params_to_json(const struct ChmParams *params, char **out);

/*
 # Safety
 `params` must come from this library and not have been freed. NULL is ignored.
 */
void chm_params_free(struct ChmParams *params);

/*
 Sample an Ornstein–Uhlenbeck path on `[0, t_end]` with spacing `dt`.

 # Safety
 `out` must be writable.
 */
enum ChmStatus chm_noise_sample(uint64_t seed,
                                double t_end,
                                double dt,
                                double burn_in,
                                struct ChmNoise **out);

/*
 Identically zero path, for deterministic runs.

 # Safety
 `out` must be writable.
 */
enum ChmStatus chm_noise_zeros(double t_end, double dt, struct ChmNoise **out);

/*
 Number of grid points, or 0 for NULL.

 # Safety
 `noise` must be a live handle or NULL.
 */
size_t chm_noise_len(const struct ChmNoise *noise);

/*
 Copy the path values into `values[0..len]`.

 # Safety
 `noise` must be a live handle; `values` must hold `capacity` doubles.
 */
enum ChmStatus chm_noise_values(const struct ChmNoise *noise, double *values, size_t capacity);

/*
 # Safety
 `noise` must come from this library and not have been freed. NULL is ignored.
 */
void chm_noise_free(struct ChmNoise *noise);

/*
 Integrate from `(s0, m1_0, m2_0)` to `t_end` with step `dt`, recording
 every `record_every` steps. `dt` must equal or divide the noise spacing.

 # Safety
 `params` and `noise` must be live handles; `out` must be writable.
 */
enum ChmStatus chm_integrate(const struct ChmParams *params,
                             const struct ChmNoise *noise,
                             double s0,
                             double m1_0,
                             double m2_0,
                             double t_end,
                             double dt,
                             size_t record_every,
                             struct ChmTrajectory **out);

/*
 Number of recorded points, or 0 for NULL.

 # Safety
 `traj` must be a live handle or NULL.
 */
size_t chm_trajectory_len(const struct ChmTrajectory *traj);

/*
 Number of round-off clamps applied during integration, or 0 for NULL.

 # Safety
 `traj` must be a live handle or NULL.
 */
size_t chm_trajectory_clamp_count(const struct ChmTrajectory *traj);

/*
 Copy the recorded columns; each buffer must hold `capacity` doubles.

 # Safety
 `traj` must be a live handle; every buffer must be valid for `capacity` writes.
 */
enum ChmStatus chm_trajectory_copy(const struct ChmTrajectory *traj,
                                   double *t,
                                   double *s,
                                   double *m1,
                                   double *m2,
                                   size_t capacity);

/*
 # Safety
 `traj` must come from this library and not have been freed. NULL is ignored.
 */
void chm_trajectory_free(struct ChmTrajectory *traj);

/*
 Closed-form analysis report as JSON; free the result with
 [`chm_string_free`]. Nonzero flags select the variants.

 # Safety
 `params` must be a live handle; `out` must be writable.
 */
enum ChmStatus chm_analyze_json(const struct ChmParams *params,
                                int32_t verbatim_f,
                                int32_t strict_proof_consistent,
                                char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHEMOSTAT_H */
