/* C interface to the airyedge toolkit. Generated by cbindgen; do not edit. */

#ifndef AIRYEDGE_H
#define AIRYEDGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible entry point.
 */
typedef enum AiryEdgeStatus {
  AIRY_EDGE_STATUS_OK = 0,
  AIRY_EDGE_STATUS_NULL_POINTER = 1,
  AIRY_EDGE_STATUS_INVALID_PARAMETER = 2,
  AIRY_EDGE_STATUS_DIMENSION = 3,
  AIRY_EDGE_STATUS_CONVERGENCE = 4,
  AIRY_EDGE_STATUS_INTERLACING = 5,
  AIRY_EDGE_STATUS_INSUFFICIENT_SAMPLES = 6,
  AIRY_EDGE_STATUS_IO = 7,
  AIRY_EDGE_STATUS_BUFFER_TOO_SMALL = 8,
  AIRY_EDGE_STATUS_PANIC = 9,
} AiryEdgeStatus;

/**
 * Opaque Brownian path handle.
 */
typedef struct AiryEdgePath AiryEdgePath;

/**
 * Opaque deterministic random stream handle.
 */
typedef struct AiryEdgeStream AiryEdgeStream;

/**
 * Opaque coupled-trajectory handle.
 */
typedef struct AiryEdgeTrajectory AiryEdgeTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version string.
 */
enum AiryEdgeStatus airyedge_version(char *buf, size_t len);

/**
 * Message describing the most recent failure on this thread.
 */
enum AiryEdgeStatus airyedge_last_error_message(char *buf, size_t len);

/**
 * New deterministic stream; never fails. Free with `airyedge_stream_free`.
 */
struct AiryEdgeStream *airyedge_stream_new(uint64_t master_seed, uint64_t stream_index);

/**
 * Independent child stream derived from a parent; the parent is untouched.
 */
struct AiryEdgeStream *airyedge_stream_substream(const struct AiryEdgeStream *stream,
                                                 uint64_t child);

/**
 * One uniform draw on [0, 1).
 */
enum AiryEdgeStatus airyedge_stream_uniform(struct AiryEdgeStream *stream, double *out);

void airyedge_stream_free(struct AiryEdgeStream *stream);

/**
 * Coupled minor-process trajectory on one fresh draw from `stream`.
 * `beta` may be infinite for the noiseless ensemble.
 */
enum AiryEdgeStatus airyedge_trajectory_compute(struct AiryEdgeStream *stream,
                                                size_t n,
                                                double beta,
                                                size_t num_eigs,
                                                double t_max,
                                                double dt,
                                                struct AiryEdgeTrajectory **out);

enum AiryEdgeStatus airyedge_trajectory_num_frames(const struct AiryEdgeTrajectory *traj,
                                                   size_t *out);

enum AiryEdgeStatus airyedge_trajectory_num_eigs(const struct AiryEdgeTrajectory *traj,
                                                 size_t *out);

/**
 * Copy one frame. Array out-parameters receive `len` values each and may be
 * null to skip; `len` must equal the trajectory's eigenvalue count.
 * `out_deriv` receives the squared-slope derivative estimates.
 */
enum AiryEdgeStatus airyedge_trajectory_frame(const struct AiryEdgeTrajectory *traj,
                                              size_t frame_index,
                                              double *out_t,
                                              double *out_scaled,
                                              double *out_recentered,
                                              double *out_deriv,
                                              size_t len);

void airyedge_trajectory_free(struct AiryEdgeTrajectory *traj);

/**
 * Scaled spectral weights over independent draws, written row-major as
 * `reps` rows of `num_eigs` values; `len` must equal `reps * num_eigs`.
 */
enum AiryEdgeStatus airyedge_weight_samples(const struct AiryEdgeStream *stream,
                                            size_t n,
                                            double beta,
                                            size_t num_eigs,
                                            size_t reps,
                                            double *out,
                                            size_t len);

/**
 * Sample a Brownian path covering `[0, span]` at mesh `mesh`.
 */
enum AiryEdgeStatus airyedge_path_sample(struct AiryEdgeStream *stream,
                                         double mesh,
                                         double span,
                                         struct AiryEdgePath **out);

/**
 * Path geometry; each out-parameter may be null to skip.
 */
enum AiryEdgeStatus airyedge_path_info(const struct AiryEdgePath *path,
                                       double *out_origin,
                                       double *out_mesh,
                                       size_t *out_num_cells);

void airyedge_path_free(struct AiryEdgePath *path);

/**
 * Lowest `k` eigenvalues and boundary slopes of the discretized operator on
 * `[t_index * mesh, l_right]` driven by `path`. `out_eigs` is required with
 * `len == k`; `out_slopes` may be null.
 */
enum AiryEdgeStatus airyedge_sao_solve(const struct AiryEdgePath *path,
                                       double beta,
                                       size_t t_index,
                                       double l_right,
                                       size_t k,
                                       double *out_eigs,
                                       double *out_slopes,
                                       size_t len);

/**
 * Derivative reports for the lowest `k` modes at boundary cell `t_index`:
 * finite-difference quotient over a `window_cells` shift against the squared
 * boundary slope. Arrays hold `len == k` values; any may be null.
 */
enum AiryEdgeStatus airyedge_sao_derivative(const struct AiryEdgePath *path,
                                            double beta,
                                            size_t t_index,
                                            size_t k,
                                            size_t window_cells,
                                            double *out_fd,
                                            double *out_slope_sq,
                                            double *out_rel_err,
                                            size_t len);

/**
 * Number of checklist criteria; valid ids are `1..=airyedge_num_criteria()`.
 */
size_t airyedge_num_criteria(void);

/**
 * Name of a checklist criterion.
 */
enum AiryEdgeStatus airyedge_criterion_name(size_t id, char *buf, size_t len);

/**
 * Run one checklist criterion at `seed`. `out_passed` is required;
 * `out_seconds` and the details buffer are optional.
 */
enum AiryEdgeStatus airyedge_run_criterion(size_t id,
                                           uint64_t seed,
                                           bool *out_passed,
                                           double *out_seconds,
                                           char *details_buf,
                                           size_t details_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIRYEDGE_H */
