#ifndef NSCH_VEM_H
#define NSCH_VEM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum NschStatus {
  NSCH_STATUS_OK = 0,
  NSCH_STATUS_NULL_ARGUMENT = 1,
  NSCH_STATUS_INVALID_UTF8 = 2,
  NSCH_STATUS_CONFIG = 3,
  NSCH_STATUS_MESH = 4,
  NSCH_STATUS_SOLVER = 5,
  NSCH_STATUS_IO = 6,
  // The query needs the manufactured solution of the `test1` experiment.
  NSCH_STATUS_NOT_AVAILABLE = 7,
  NSCH_STATUS_BUFFER_TOO_SMALL = 8,
  NSCH_STATUS_PANIC = 9,
} NschStatus;

// Opaque solver handle.
typedef struct NschSolver NschSolver;

// Sizes of a solver.
typedef struct NschSizes {
  size_t cells;
  size_t vertices;
  size_t unknowns;
  size_t velocity_dofs;
  size_t pressure_dofs;
  size_t phase_dofs;
  // Steps of the configured time grid.
  size_t steps;
  double tau;
} NschSizes;

// Diagnostics of the current time level.
typedef struct NschStepInfo {
  size_t step;
  double t;
  double mass;
  double energy;
  // Newton iterations of the last step, 0 for the initial state.
  size_t newton_iters;
  double final_residual;
  double div_inf_norm;
} NschStepInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty when none. The
// pointer stays valid until the next failing call on the same thread.
const char *nsch_last_error(void);

// Library version as a static NUL-terminated string.
const char *nsch_version(void);

// Creates a solver from configuration text and sets it to the
// interpolated initial state. `*out` is null on failure.
//
// # Safety
// `config` must be a NUL-terminated string and `out` a valid pointer.
enum NschStatus nsch_solver_new(const char *config, struct NschSolver **out_solver);

// Releases a solver; null is ignored.
//
// # Safety
// `s` must come from [`nsch_solver_new`] and not be used afterwards.
void nsch_solver_free(struct NschSolver *s);

// # Safety
// `s` must be a live handle and `sizes` a valid pointer.
enum NschStatus nsch_solver_sizes(const struct NschSolver *s, struct NschSizes *sizes);

// Diagnostics of the current state.
//
// # Safety
// `s` must be a live handle and `info_out` a valid pointer.
enum NschStatus nsch_solver_info(const struct NschSolver *s, struct NschStepInfo *info_out);

// Advances one step of the configured size. On failure the state is
// left unchanged. `info_out` may be null.
//
// # Safety
// `s` must be a live handle; `info_out` null or valid.
enum NschStatus nsch_solver_step(struct NschSolver *s, struct NschStepInfo *info_out);

// Relative errors `[u in H1, p in L2, phi in H2]` against the manufactured
// solution; only for the `test1` experiment.
//
// # Safety
// `s` must be a live handle and `errors` point to three doubles.
enum NschStatus nsch_solver_errors(const struct NschSolver *s, double *errors);

// Copies the phase DoF vector into `buf`. `*len` holds the capacity on
// entry and the required length on return; a null `buf` only queries it.
//
// # Safety
// `s` must be a live handle, `len` valid and `buf` null or writable for
// `*len` doubles.
enum NschStatus nsch_solver_phase(const struct NschSolver *s, double *buf, size_t *len);

// Reads a mesh file and runs the regularity check with constant `rho`;
// `*passed` is 1 when every cell passes.
//
// # Safety
// `path` must be a NUL-terminated string and `passed` a valid pointer.
enum NschStatus nsch_mesh_validate_file(const char *path, double rho, int *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSCH_VEM_H */
