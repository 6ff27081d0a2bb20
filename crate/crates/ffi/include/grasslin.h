#ifndef GRASSLIN_H
#define GRASSLIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum GrasslinStatus {
  GRASSLIN_STATUS_OK = 0,
  GRASSLIN_STATUS_NULL_POINTER = 1,
  GRASSLIN_STATUS_INVALID_ARGUMENT = 2,
  GRASSLIN_STATUS_DIMENSION_MISMATCH = 3,
  GRASSLIN_STATUS_NON_FINITE = 4,
  GRASSLIN_STATUS_THETA_ON_SINGULAR_VALUE = 5,
  GRASSLIN_STATUS_BACKWARD_ERROR_ON_THETA = 6,
  GRASSLIN_STATUS_NO_CONVERGENCE = 7,
  /*
   Any other numerical failure; see the last error message.
   */
  GRASSLIN_STATUS_NUMERICAL = 8,
  /*
   The output buffer is too small.
   */
  GRASSLIN_STATUS_BUFFER_TOO_SMALL = 9,
  /*
   The solution set is empty, so there is no anchor or kernel.
   */
  GRASSLIN_STATUS_EMPTY_SOLUTION = 10,
  GRASSLIN_STATUS_PANIC = 11,
} GrasslinStatus;

/*
 Opaque dense complex matrix.
 */
typedef struct GrasslinMatrix GrasslinMatrix;

/*
 Opaque general numerical solution with its report.
 */
typedef struct GrasslinSolution GrasslinSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Name of a status code as a static NUL-terminated string.
 */
const char *grasslin_status_name(enum GrasslinStatus status);

/*
 Message of the last failure on this thread; empty if none. Valid until the
 next failing call on the same thread.
 */
const char *grasslin_last_error_message(void);

/*
 Creates a `rows × cols` matrix from column-major split arrays.

 # Safety
 `re` must hold `rows * cols` doubles, `im` must be null or hold as many,
 and `out` must be a valid pointer.
 */
enum GrasslinStatus grasslin_matrix_new(size_t rows,
                                        size_t cols,
                                        const double *re,
                                        const double *im,
                                        struct GrasslinMatrix **out);

/*
 # Safety
 `m` must be null or a handle from [`grasslin_matrix_new`] not yet freed.
 */
void grasslin_matrix_free(struct GrasslinMatrix *m);

/*
 # Safety
 `m` must be a live matrix handle; `rows` and `cols` may be null.
 */
enum GrasslinStatus grasslin_matrix_shape(const struct GrasslinMatrix *m,
                                          size_t *rows,
                                          size_t *cols);

/*
 Numerical rank at tolerance `theta`. A `guard` of 0 or less uses the
 default guard band.

 # Safety
 `m` must be a live matrix handle and `rank` a valid pointer.
 */
enum GrasslinStatus grasslin_numerical_rank(const struct GrasslinMatrix *m,
                                            double theta,
                                            double guard,
                                            size_t *rank);

/*
 General numerical solution of `A x = b` within `theta`.

 # Safety
 `a` must be a live matrix handle, `b_re` must hold `b_len` doubles, `b_im`
 must be null or hold as many, and `out` must be a valid pointer.
 */
enum GrasslinStatus grasslin_solve(const struct GrasslinMatrix *a,
                                   const double *b_re,
                                   const double *b_im,
                                   size_t b_len,
                                   double theta,
                                   struct GrasslinSolution **out);

/*
 # Safety
 `s` must be null or a handle from [`grasslin_solve`] not yet freed.
 */
void grasslin_solution_free(struct GrasslinSolution *s);

/*
 Dimension of the solution set: −1 when empty, otherwise the kernel dimension.

 # Safety
 `s` must be a live solution handle.
 */
ptrdiff_t grasslin_solution_dimension(const struct GrasslinSolution *s);

/*
 Numerical rank, ambient dimension `n`, backward error, `σ₁/σ_r` (NaN when
 the rank is 0) and residual (NaN for the empty set). Any output may be null.

 # Safety
 `s` must be a live solution handle; non-null outputs must be valid.
 */
enum GrasslinStatus grasslin_solution_report(const struct GrasslinSolution *s,
                                             size_t *rank,
                                             size_t *cols,
                                             double *backward_error,
                                             double *sensitivity,
                                             double *residual);

/*
 Copies the minimum-norm anchor (length `n`) into split arrays.

 # Safety
 `s` must be a live solution handle; `re` must hold `len` doubles and `im`
 must be null or hold as many.
 */
enum GrasslinStatus grasslin_solution_anchor(const struct GrasslinSolution *s,
                                             double *re,
                                             double *im,
                                             size_t len);

/*
 Copies the orthonormal kernel basis (`n × k`, column-major) into split
 arrays of at least `n · k` entries, `k` = [`grasslin_solution_dimension`].

 # Safety
 `s` must be a live solution handle; `re` must hold `len` doubles and `im`
 must be null or hold as many.
 */
enum GrasslinStatus grasslin_solution_kernel(const struct GrasslinSolution *s,
                                             double *re,
                                             double *im,
                                             size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRASSLIN_H */
