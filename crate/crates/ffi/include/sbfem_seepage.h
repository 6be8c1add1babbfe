#ifndef SBFEM_SEEPAGE_H
#define SBFEM_SEEPAGE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SbfemStatus {
  SBFEM_STATUS_OK = 0,
  SBFEM_STATUS_NULL_POINTER = 1,
  SBFEM_STATUS_INVALID_ARGUMENT = 2,
  SBFEM_STATUS_MODEL = 3,
  SBFEM_STATUS_SOLVER = 4,
  SBFEM_STATUS_VERIFICATION = 5,
  SBFEM_STATUS_IO = 6,
  SBFEM_STATUS_PANIC = 7,
} SbfemStatus;

/**
 * Stored frames and monitor traces of a transient run.
 */
typedef struct SbfemHistory SbfemHistory;

/**
 * A checked model.
 */
typedef struct SbfemModel SbfemModel;

/**
 * Steady heads with the element operators needed to sample them.
 */
typedef struct SbfemSolution SbfemSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the length needed including the NUL.
 * Returns 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t sbfem_last_error_message(char *buf, size_t len);

/**
 * Reads a model file: a native JSON model, or an `.inp` deck with an
 * optional JSON overlay (`overlay` may be null).
 *
 * # Safety
 * `path` and `overlay` must be null or NUL-terminated strings; `out` must be writable.
 */
enum SbfemStatus sbfem_model_load(const char *path, const char *overlay, struct SbfemModel **out);

/**
 * Parses a native JSON model from memory.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SbfemStatus sbfem_model_from_json(const char *json, struct SbfemModel **out);

/**
 * # Safety
 * `model` must be null or a handle from `sbfem_model_*` not yet freed.
 */
void sbfem_model_free(struct SbfemModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SbfemStatus sbfem_model_num_nodes(const struct SbfemModel *model, size_t *out);

/**
 * Node coordinates as `x0, y0, x1, y1, ...`; `len` must be twice the node count.
 *
 * # Safety
 * `model` must be a live handle and `xy` point to `len` writable doubles.
 */
enum SbfemStatus sbfem_model_node_coordinates(const struct SbfemModel *model,
                                              double *xy,
                                              size_t len);

/**
 * Solves the steady problem with the boundary heads of `t = 0`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SbfemStatus sbfem_solve_steady(const struct SbfemModel *model, struct SbfemSolution **out);

/**
 * # Safety
 * `solution` must be null or a live handle.
 */
void sbfem_solution_free(struct SbfemSolution *solution);

/**
 * Nodal heads in model node order; `len` must equal the node count.
 *
 * # Safety
 * `solution` must be a live handle and `heads` point to `len` writable doubles.
 */
enum SbfemStatus sbfem_solution_heads(const struct SbfemSolution *solution,
                                      double *heads,
                                      size_t len);

/**
 * Head and Darcy flux at an arbitrary point of the domain.
 *
 * # Safety
 * `solution` must be a live handle; the outputs must be writable.
 */
enum SbfemStatus sbfem_solution_sample(const struct SbfemSolution *solution,
                                       double x,
                                       double y,
                                       double *head,
                                       double *qx,
                                       double *qy);

/**
 * Writes the solution as a legacy VTK file.
 *
 * # Safety
 * `solution` must be a live handle and `path` a NUL-terminated string.
 */
enum SbfemStatus sbfem_solution_write_vtk(const struct SbfemSolution *solution, const char *path);

/**
 * Runs the model's transient settings with backward Euler.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SbfemStatus sbfem_run_transient(const struct SbfemModel *model, struct SbfemHistory **out);

/**
 * # Safety
 * `history` must be null or a live handle.
 */
void sbfem_history_free(struct SbfemHistory *history);

/**
 * # Safety
 * `history` must be a live handle and `out` writable.
 */
enum SbfemStatus sbfem_history_num_frames(const struct SbfemHistory *history, size_t *out);

/**
 * Time and nodal heads of stored frame `index`.
 *
 * # Safety
 * `history` must be a live handle, `t` writable and `heads` point to `len` writable doubles.
 */
enum SbfemStatus sbfem_history_frame(const struct SbfemHistory *history,
                                     size_t index,
                                     double *t,
                                     double *heads,
                                     size_t len);

/**
 * Number of monitors and of time levels in their traces.
 *
 * # Safety
 * `history` must be a live handle and the outputs writable.
 */
enum SbfemStatus sbfem_history_trace_shape(const struct SbfemHistory *history,
                                           size_t *monitors,
                                           size_t *levels);

/**
 * Times of every level and the head history of monitor `monitor`, each `len` long.
 *
 * # Safety
 * `history` must be a live handle; `times` and `values` must point to `len` writable doubles.
 */
enum SbfemStatus sbfem_history_trace(const struct SbfemHistory *history,
                                     size_t monitor,
                                     double *times,
                                     double *values,
                                     size_t len);

/**
 * Runs a named verification suite (`patch`, `convergence`, `oracle`).
 * Returns `Verification` when any of its checks fails.
 *
 * # Safety
 * `name` must be a NUL-terminated string.
 */
enum SbfemStatus sbfem_run_suite(const char *name);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SBFEM_SEEPAGE_H */
