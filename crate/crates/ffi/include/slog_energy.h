/* C interface to the slog-energy solvers. Generated; do not edit. */

#ifndef SLOG_ENERGY_H
#define SLOG_ENERGY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call. Values other than `Ok` leave a detail message
 * readable via `slog_last_error` on the same thread.
 */
typedef enum SlogStatus {
  SLOG_STATUS_OK = 0,
  /**
   * An input left the numeric domain a function is defined on.
   */
  SLOG_STATUS_DOMAIN = 1,
  /**
   * A space could not be constructed or fails its metric axioms.
   */
  SLOG_STATUS_INVALID_SPACE = 2,
  /**
   * A configuration violates its space or point-count requirements.
   */
  SLOG_STATUS_INVALID_CONFIGURATION = 3,
  /**
   * An argument (options, exponents, sizes) fails validation.
   */
  SLOG_STATUS_INVALID_ARGUMENT = 4,
  /**
   * Exhaustive enumeration would exceed the configured budget.
   */
  SLOG_STATUS_BUDGET_EXCEEDED = 5,
  /**
   * The solver could not produce any usable iterate.
   */
  SLOG_STATUS_SOLVER_FAILURE = 6,
  /**
   * No known optimality criterion applies to the requested parameters.
   */
  SLOG_STATUS_HYPOTHESIS_NOT_COVERED = 7,
  /**
   * A text input failed to parse.
   */
  SLOG_STATUS_PARSE = 8,
  SLOG_STATUS_IO = 9,
  /**
   * A required pointer argument was null.
   */
  SLOG_STATUS_NULL_POINTER = 10,
  /**
   * A string argument was not valid UTF-8.
   */
  SLOG_STATUS_UTF8 = 11,
  /**
   * An internal invariant failed; the library state is still valid.
   */
  SLOG_STATUS_PANIC = 12,
} SlogStatus;

/**
 * Opaque handle to a solve outcome: the point set plus its scores.
 * Packing results report the achieved separation in `separation` and carry
 * NaN energies, since no kernel is involved.
 */
typedef struct SlogResult SlogResult;

/**
 * Opaque handle to a metric space.
 */
typedef struct SlogSpace SlogSpace;

/**
 * Multi-start solver knobs; get defaults from `slog_solve_options_default`.
 */
typedef struct SlogSolveOptions {
  /**
   * Independent random restarts.
   */
  size_t starts;
  /**
   * Iteration cap per start.
   */
  size_t max_iters;
  /**
   * Convergence threshold on the projected gradient of the log-energy.
   */
  double grad_tol;
  /**
   * Seed from which every start's generator is derived.
   */
  uint64_t seed;
  /**
   * Nonzero adds a random-perturbation polish between descent passes.
   */
  bool anneal;
} SlogSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct SlogSolveOptions slog_solve_options_default(void);

/**
 * Short static name for a status code; never null.
 */
const char *slog_status_name(enum SlogStatus status);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncating to `cap` bytes) and returns the full message length in bytes,
 * excluding the NUL. `buf` may be null or `cap` zero to query the length.
 *
 * # Safety
 * `buf`, when non-null, must point to at least `cap` writable bytes.
 */
size_t slog_last_error(char *buf, size_t cap);

/**
 * Creates the segment [a, b]. Fails unless a < b and b - a stays below 1.
 *
 * # Safety
 * `out` must be a valid pointer to a `SlogSpace*` slot.
 */
enum SlogStatus slog_space_new_segment(double a, double b, struct SlogSpace **out);

/**
 * Creates a circle of radius `alpha`; `chord` nonzero selects the chord
 * metric, zero the geodesic one. The diameter must stay below 1.
 *
 * # Safety
 * `out` must be a valid pointer to a `SlogSpace*` slot.
 */
enum SlogStatus slog_space_new_circle(double alpha, bool chord, struct SlogSpace **out);

/**
 * Creates the origin-centered sphere of radius `alpha` (diameter below 1).
 *
 * # Safety
 * `out` must be a valid pointer to a `SlogSpace*` slot.
 */
enum SlogStatus slog_space_new_sphere(double alpha, struct SlogSpace **out);

/**
 * Loads a finite metric space from a CSV distance matrix file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer to a
 * `SlogSpace*` slot.
 */
enum SlogStatus slog_space_new_finite_csv(const char *path, struct SlogSpace **out);

/**
 * Releases a space handle. Null is a no-op.
 *
 * # Safety
 * `space` must be null or a pointer previously returned by a
 * `slog_space_new_*` call that has not been freed yet.
 */
void slog_space_free(struct SlogSpace *space);

/**
 * Writes the space diameter to `out`.
 *
 * # Safety
 * `space` must be a live space handle and `out` a valid `double` slot.
 */
enum SlogStatus slog_space_diameter(const struct SlogSpace *space, double *out);

/**
 * Writes the per-point coordinate count of the space to `out` (1 for
 * segments, circles and finite grids; 3 for the sphere).
 *
 * # Safety
 * `space` must be a live space handle and `out` a valid `size_t` slot.
 */
enum SlogStatus slog_space_point_len(const struct SlogSpace *space, size_t *out);

/**
 * Evaluates the kernel d^-s * log(1/d)^t at distance `d` in [0, 1);
 * coincident points (d = 0) yield +inf for a nontrivial kernel.
 *
 * # Safety
 * `out` must be a valid `double` slot.
 */
enum SlogStatus slog_kernel_eval(double s, double t, double d, double *out);

/**
 * Evaluates the energy of `n` points (each `slog_space_point_len` doubles,
 * concatenated) over ordered pairs. `out_linear` receives the energy and
 * `out_log`, when non-null, its natural logarithm.
 *
 * # Safety
 * `space` must be a live space handle, `points` must hold
 * `n * slog_space_point_len(space)` doubles, and `out_linear` must be a
 * valid `double` slot.
 */
enum SlogStatus slog_energy_eval(const struct SlogSpace *space,
                                 const double *points,
                                 size_t n,
                                 double s,
                                 double t,
                                 double *out_linear,
                                 double *out_log);

/**
 * Writes the smallest pairwise distance of the point set to `out`.
 *
 * # Safety
 * Same buffer contract as `slog_energy_eval`.
 */
enum SlogStatus slog_separation(const struct SlogSpace *space,
                                const double *points,
                                size_t n,
                                double *out);

/**
 * Minimizes the n-point energy at (s, t) with the multi-start solver.
 * `opts` may be null for defaults. On success `*out` owns a result handle.
 *
 * # Safety
 * `space` must be a live space handle, `opts` null or a valid options
 * struct, and `out` a valid pointer to a `SlogResult*` slot.
 */
enum SlogStatus slog_minimize(const struct SlogSpace *space,
                              size_t n,
                              double s,
                              double t,
                              const struct SlogSolveOptions *opts,
                              struct SlogResult **out);

/**
 * Finds an n-point best-packing (maximal separation) configuration.
 * The result's energies are NaN; `separation` holds the achieved value.
 *
 * # Safety
 * Same contract as `slog_minimize`.
 */
enum SlogStatus slog_best_packing(const struct SlogSpace *space,
                                  size_t n,
                                  const struct SlogSolveOptions *opts,
                                  struct SlogResult **out);

/**
 * Releases a result handle. Null is a no-op.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
void slog_result_free(struct SlogResult *result);

/**
 * Writes the point count.
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid slot.
 */
enum SlogStatus slog_result_n(const struct SlogResult *result, size_t *out);

/**
 * Writes the per-point coordinate count.
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid slot.
 */
enum SlogStatus slog_result_point_len(const struct SlogResult *result, size_t *out);

/**
 * Writes the energy over ordered pairs (NaN for packing results).
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid slot.
 */
enum SlogStatus slog_result_energy(const struct SlogResult *result, double *out);

/**
 * Writes the natural log of the energy (NaN for packing results).
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid slot.
 */
enum SlogStatus slog_result_log_energy(const struct SlogResult *result, double *out);

/**
 * Writes the smallest pairwise distance of the result points.
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid slot.
 */
enum SlogStatus slog_result_separation(const struct SlogResult *result, double *out);

/**
 * Writes whether every reported figure came from a converged solve.
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid slot.
 */
enum SlogStatus slog_result_converged(const struct SlogResult *result, bool *out);

/**
 * Writes how many restarts agreed with the best energy found.
 *
 * # Safety
 * `result` must be a live result handle and `out` a valid slot.
 */
enum SlogStatus slog_result_starts_agreeing(const struct SlogResult *result, size_t *out);

/**
 * Copies the result's points into `buf` as n * point_len doubles,
 * point-major. `cap` is the buffer length in doubles.
 *
 * # Safety
 * `result` must be a live result handle and `buf` must hold `cap` doubles.
 */
enum SlogStatus slog_result_points(const struct SlogResult *result, double *buf, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLOG_ENERGY_H */
