#ifndef CGDARE_H
#define CGDARE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Seed used by the C caller when it has no preference.
 */
#define CGDARE_DEFAULT_SEED 104372262304785

typedef enum CgdareStatus {
  CGDARE_STATUS_OK = 0,
  CGDARE_STATUS_NULL_POINTER = 1,
  CGDARE_STATUS_DIMENSION_MISMATCH = 2,
  CGDARE_STATUS_NOT_SYMMETRIC = 3,
  CGDARE_STATUS_NOT_PSD = 4,
  CGDARE_STATUS_NON_FINITE = 5,
  CGDARE_STATUS_INVALID_ARGUMENT = 6,
  CGDARE_STATUS_NO_SOLUTION = 7,
  CGDARE_STATUS_INDEX_OUT_OF_RANGE = 8,
  CGDARE_STATUS_INTERNAL = 9,
} CgdareStatus;

/**
 * Solution families of one triple.
 */
typedef struct CgdareSolutionSet CgdareSolutionSet;

/**
 * A validated Popov triple together with the tolerance used by every call
 * on it.
 */
typedef struct CgdareTriple CgdareTriple;

typedef struct CgdareDiagnosis {
  bool pencil_regular;
  bool n_singular;
  bool r_singular;
  bool a0_singular;
  size_t rank_r;
  /**
   * -1 when no solution was available.
   */
  int64_t rank_rx;
  /**
   * -1 unknown, 0 no, 1 yes.
   */
  int32_t closed_loop_singular_predicted;
  /**
   * -1 unknown, 0 no, 1 yes.
   */
  int32_t closed_loop_singular_observed;
} CgdareDiagnosis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a triple from row-major `A` (n×n), `B` (n×m), `Q` (n×n), `R` (m×m)
 * and optional `S` (n×m; null means zero) with the default tolerance.
 *
 * # Safety
 * Non-null pointers must reference buffers of the stated sizes; `out` must
 * be writable.
 */
enum CgdareStatus cgdare_triple_new(size_t n,
                                    size_t m,
                                    const double *a,
                                    const double *b,
                                    const double *q,
                                    const double *r,
                                    const double *s,
                                    struct CgdareTriple **out);

/**
 * # Safety
 * `t` must be null or a handle from [`cgdare_triple_new`] not yet freed.
 */
void cgdare_triple_free(struct CgdareTriple *t);

/**
 * Replaces the tolerance of `t`. Both values must be finite and positive.
 *
 * # Safety
 * `t` must be a live triple handle.
 */
enum CgdareStatus cgdare_triple_set_tolerance(struct CgdareTriple *t,
                                              double rel,
                                              double abs_residual);

/**
 * State dimension of `t`, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live triple handle.
 */
size_t cgdare_triple_state_dim(const struct CgdareTriple *t);

/**
 * Input dimension of `t`, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live triple handle.
 */
size_t cgdare_triple_input_dim(const struct CgdareTriple *t);

/**
 * Reduces, solves and lifts. The result must be released with
 * [`cgdare_solution_set_free`].
 *
 * # Safety
 * `t` must be a live triple handle and `out` writable.
 */
enum CgdareStatus cgdare_solve(const struct CgdareTriple *t, struct CgdareSolutionSet **out);

/**
 * # Safety
 * `s` must be null or a handle from [`cgdare_solve`] not yet freed.
 */
void cgdare_solution_set_free(struct CgdareSolutionSet *s);

/**
 * Number of families, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live solution-set handle.
 */
size_t cgdare_solution_set_len(const struct CgdareSolutionSet *s);

/**
 * Order `n` of every matrix in the set, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live solution-set handle.
 */
size_t cgdare_solution_set_state_dim(const struct CgdareSolutionSet *s);

/**
 * Whether every solution was enumerated.
 *
 * # Safety
 * `s` must be null or a live solution-set handle.
 */
bool cgdare_solution_set_exhaustive(const struct CgdareSolutionSet *s);

/**
 * Index of the stabilizing family, or -1 when there is none.
 *
 * # Safety
 * `s` must be null or a live solution-set handle.
 */
int64_t cgdare_solution_set_stabilizing(const struct CgdareSolutionSet *s);

/**
 * Number of free parameters of family `index`.
 *
 * # Safety
 * `s` must be a live solution-set handle and `out` writable.
 */
enum CgdareStatus cgdare_family_dim(const struct CgdareSolutionSet *s, size_t index, size_t *out);

/**
 * Copies the base matrix of family `index` into `out` (`len` = n·n).
 *
 * # Safety
 * `s` must be a live solution-set handle and `out` hold `len` doubles.
 */
enum CgdareStatus cgdare_family_base(const struct CgdareSolutionSet *s,
                                     size_t index,
                                     double *out,
                                     size_t len);

/**
 * Copies basis direction `direction` of family `index` into `out`.
 *
 * # Safety
 * `s` must be a live solution-set handle and `out` hold `len` doubles.
 */
enum CgdareStatus cgdare_family_basis(const struct CgdareSolutionSet *s,
                                      size_t index,
                                      size_t direction,
                                      double *out,
                                      size_t len);

/**
 * Writes `X₀ + Σ ξᵢHᵢ` for family `index`; `xi` holds one value per
 * parameter and may be null when the family is isolated.
 *
 * # Safety
 * `xi` must hold `xi_len` doubles and `out` hold `len` doubles.
 */
enum CgdareStatus cgdare_family_member(const struct CgdareSolutionSet *s,
                                       size_t index,
                                       const double *xi,
                                       size_t xi_len,
                                       double *out,
                                       size_t len);

/**
 * Residual check of a row-major candidate `x` (n×n). `accepted` is set when
 * the residual is within tolerance and the kernel condition holds.
 *
 * # Safety
 * `x` must hold `len` doubles; output pointers must be writable.
 */
enum CgdareStatus cgdare_verify(const struct CgdareTriple *t,
                                const double *x,
                                size_t len,
                                double *residual,
                                bool *kernel_ok,
                                bool *accepted);

/**
 * Singularity diagnostics. Closed-loop entries use the solutions found by
 * [`cgdare_solve`] and stay unknown when the solve fails.
 *
 * # Safety
 * `t` must be a live triple handle and `out` writable.
 */
enum CgdareStatus cgdare_diagnose(const struct CgdareTriple *t,
                                  uint64_t seed,
                                  struct CgdareDiagnosis *out);

/**
 * Message of the last failed call on this thread, empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *cgdare_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CGDARE_H */
