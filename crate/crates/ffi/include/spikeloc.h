#ifndef SPIKELOC_H
#define SPIKELOC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpikelocStatus {
  SPIKELOC_STATUS_OK = 0,
  SPIKELOC_STATUS_IO = 1,
  SPIKELOC_STATUS_VALIDATION = 2,
  SPIKELOC_STATUS_DIVERGENCE = 3,
  SPIKELOC_STATUS_NULL_POINTER = 10,
  SPIKELOC_STATUS_INVALID_UTF8 = 11,
  SPIKELOC_STATUS_DIMENSION_MISMATCH = 12,
  SPIKELOC_STATUS_OUT_OF_RANGE = 13,
  SPIKELOC_STATUS_PANIC = 14,
} SpikelocStatus;

typedef enum SpikelocKind {
  SPIKELOC_KIND_MINIMUM_OF_SIGMA = 0,
  SPIKELOC_KIND_MAXIMUM_OF_SIGMA = 1,
  SPIKELOC_KIND_SADDLE = 2,
  SPIKELOC_KIND_DEGENERATE = 3,
} SpikelocKind;

// Critical points of the energy landscape.
typedef struct SpikelocCandidates SpikelocCandidates;

// Canonical ground state on a radial grid.
typedef struct SpikelocGroundState SpikelocGroundState;

// Dimension, exponents and the three potentials.
typedef struct SpikelocProblem SpikelocProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Toolkit version as a static NUL-terminated string.
const char *spikeloc_version(void);

// Copies the last error message into `buf` (truncated, always
// NUL-terminated when `cap > 0`) and returns the full message length.
//
// # Safety
// `buf` must point to `cap` writable bytes or be null.
size_t spikeloc_last_error(char *buf, size_t cap);

// Validates a problem. Null potential strings default to `"1"`.
//
// # Safety
// String arguments must be null or NUL-terminated; `out` must be writable.
enum SpikelocStatus spikeloc_problem_new(size_t n,
                                         double p,
                                         double q,
                                         const char *k_expr,
                                         const char *q_expr,
                                         const char *v_expr,
                                         struct SpikelocProblem **out);

// # Safety
// `problem` must come from [`spikeloc_problem_new`] or be null.
void spikeloc_problem_free(struct SpikelocProblem *problem);

// Solves the canonical ground state. `radius <= 0` or `nodes == 0` selects
// the dimension default grid.
//
// # Safety
// `problem` must be a live handle; `out` must be writable.
enum SpikelocStatus spikeloc_ground_state_solve(const struct SpikelocProblem *problem,
                                                double radius,
                                                size_t nodes,
                                                struct SpikelocGroundState **out);

// # Safety
// `gs` must come from [`spikeloc_ground_state_solve`] or be null.
void spikeloc_ground_state_free(struct SpikelocGroundState *gs);

// Energy level, peaks and decay rate. Any output pointer may be null.
//
// # Safety
// `gs` must be a live handle.
enum SpikelocStatus spikeloc_ground_state_summary(const struct SpikelocGroundState *gs,
                                                  double *gamma,
                                                  double *peak_u,
                                                  double *peak_v,
                                                  double *theta);

// Number of radial nodes.
//
// # Safety
// `gs` must be a live handle or null (returns 0).
size_t spikeloc_ground_state_len(const struct SpikelocGroundState *gs);

// Copies nodes and profiles into arrays of length `len`, which must equal
// [`spikeloc_ground_state_len`]. Null arrays are skipped.
//
// # Safety
// Non-null arrays must hold `len` doubles.
enum SpikelocStatus spikeloc_ground_state_profile(const struct SpikelocGroundState *gs,
                                                  double *r,
                                                  double *u,
                                                  double *v,
                                                  size_t len);

// Σ and its gradient at `z` (length `dim`). `grad` may be null.
//
// # Safety
// Handles must be live; `z` and non-null `grad` must hold `dim` doubles.
enum SpikelocStatus spikeloc_sigma_at(const struct SpikelocProblem *problem,
                                      const struct SpikelocGroundState *gs,
                                      const double *z,
                                      size_t dim,
                                      double *sigma,
                                      double *grad);

// Multistart search for critical points of Σ inside `[lo, hi]`.
//
// # Safety
// `problem` must be live; `lo`, `hi` must hold `dim` doubles; `out` writable.
enum SpikelocStatus spikeloc_locate(const struct SpikelocProblem *problem,
                                    const double *lo,
                                    const double *hi,
                                    size_t dim,
                                    uint64_t seed,
                                    struct SpikelocCandidates **out);

// # Safety
// `c` must come from [`spikeloc_locate`] or be null.
void spikeloc_candidates_free(struct SpikelocCandidates *c);

// # Safety
// `c` must be a live handle or null (returns 0).
size_t spikeloc_candidates_len(const struct SpikelocCandidates *c);

// True when Σ is constant over the box and every point is critical.
//
// # Safety
// `c` must be a live handle or null.
bool spikeloc_candidates_degenerate(const struct SpikelocCandidates *c);

// Location (into `z`, length `dim`), classification and locator value of
// candidate `index`. `kind` and `g_value` may be null.
//
// # Safety
// `c` must be live; `z` must hold `dim` doubles.
enum SpikelocStatus spikeloc_candidates_get(const struct SpikelocCandidates *c,
                                            size_t index,
                                            double *z,
                                            size_t dim,
                                            enum SpikelocKind *kind,
                                            double *g_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPIKELOC_H */
