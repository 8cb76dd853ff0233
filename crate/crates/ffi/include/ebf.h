#ifndef EBF_H
#define EBF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EbfStatus {
  EBF_STATUS_OK = 0,
  EBF_STATUS_INVALID_ARGUMENT = 1,
  EBF_STATUS_NULL_POINTER = 2,
  EBF_STATUS_SHAPE_MISMATCH = 3,
  EBF_STATUS_NO_GUARANTEED_SURROGATE = 4,
  EBF_STATUS_NUMERICAL = 5,
  EBF_STATUS_IO = 6,
  EBF_STATUS_BUFFER_TOO_SMALL = 7,
  EBF_STATUS_PANIC = 8,
} EbfStatus;

typedef enum EbfPriorKind {
  EBF_PRIOR_KIND_NONE = 0,
  EBF_PRIOR_KIND_GAMMA = 1,
  EBF_PRIOR_KIND_INVERSE_GAMMA = 2,
  EBF_PRIOR_KIND_HALF_GAUSSIAN = 3,
  EBF_PRIOR_KIND_HALF_LAPLACE = 4,
  EBF_PRIOR_KIND_HALF_GENERALIZED_GAUSSIAN = 5,
} EbfPriorKind;

typedef enum EbfCurvature {
  EBF_CURVATURE_CONVEX = 0,
  EBF_CURVATURE_CONCAVE = 1,
  EBF_CURVATURE_NEITHER = 2,
} EbfCurvature;

typedef enum EbfKktClass {
  EBF_KKT_CLASS_ZERO_GLOBAL = 0,
  EBF_KKT_CLASS_ZERO_LOCAL = 1,
  EBF_KKT_CLASS_POSITIVE_LOCAL = 2,
  EBF_KKT_CLASS_POSITIVE_STATIONARY = 3,
} EbfKktClass;

typedef enum EbfSurrogate {
  EBF_SURROGATE_AUTO = 0,
  EBF_SURROGATE_LINEARIZE_LOG_DET_ONLY = 1,
  EBF_SURROGATE_LINEARIZE_ALL = 2,
} EbfSurrogate;

/**
 * Opaque hyperprior handle.
 */
typedef struct EbfPrior EbfPrior;

/**
 * Opaque solver result handle.
 */
typedef struct EbfSolveResult EbfSolveResult;

typedef struct EbfKktPoint {
  double gamma;
  double multiplier;
  enum EbfKktClass classification;
} EbfKktPoint;

typedef struct EbfSolverConfig {
  double tau;
  double omega;
  size_t max_iter;
  double rel_tol;
  enum EbfSurrogate surrogate;
} EbfSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next `ebf_` call on the same thread.
 */
const char *ebf_last_error(void);

/**
 * Creates a hyperprior. Parameters a kind does not use are ignored; pass NaN
 * for them. Gamma and InverseGamma use `alpha` and `beta`, HalfGaussian
 * `theta`, HalfLaplace `beta`, HalfGeneralizedGaussian `zeta` and `beta`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum EbfStatus ebf_prior_new(enum EbfPriorKind kind,
                             double alpha,
                             double beta,
                             double zeta,
                             double theta,
                             struct EbfPrior **out);

/**
 * # Safety
 * `prior` must be NULL or a handle from [`ebf_prior_new`] not yet freed.
 */
void ebf_prior_free(struct EbfPrior *prior);

/**
 * H(γ) for γ ≥ 0; may be ±infinity at γ = 0.
 *
 * # Safety
 * `prior` must be a live handle and `out` writable.
 */
enum EbfStatus ebf_prior_h_value(const struct EbfPrior *prior, double gamma, double *out);

/**
 * H'(γ) for γ > 0.
 *
 * # Safety
 * `prior` must be a live handle and `out` writable.
 */
enum EbfStatus ebf_prior_h_prime(const struct EbfPrior *prior, double gamma, double *out);

/**
 * # Safety
 * `prior` must be a live handle and `out` writable.
 */
enum EbfStatus ebf_prior_curvature(const struct EbfPrior *prior, enum EbfCurvature *out);

/**
 * Global minimizer of the scalar problem L(γ) over γ ≥ 0.
 *
 * # Safety
 * `prior` must be a live handle and `out` writable.
 */
enum EbfStatus ebf_kkt_global_minimizer(double p2,
                                        double q,
                                        const struct EbfPrior *prior,
                                        struct EbfKktPoint *out);

/**
 * All KKT points of L, best first. Writes at most `capacity` points and
 * stores the total count in `out_len`; returns `BufferTooSmall` when
 * `capacity` is insufficient. `points` may be NULL when `capacity` is 0.
 *
 * # Safety
 * `points` must have room for `capacity` entries and `out_len` be writable.
 */
enum EbfStatus ebf_kkt_points(double p2,
                              double q,
                              const struct EbfPrior *prior,
                              struct EbfKktPoint *points,
                              size_t capacity,
                              size_t *out_len);

/**
 * DCT-basis eigenvalues of the reflective Gaussian blur.
 *
 * # Safety
 * `out` must have room for `height * width` doubles.
 */
enum EbfStatus ebf_blur_eigenvalues(double sigma_ker, size_t height, size_t width, double *out);

/**
 * Orthonormal 2-D DCT-II.
 *
 * # Safety
 * `pixels` and `out` must each hold `height * width` doubles.
 */
enum EbfStatus ebf_dct2_forward(const double *pixels, size_t height, size_t width, double *out);

/**
 * Inverse of [`ebf_dct2_forward`].
 *
 * # Safety
 * `coeffs` and `out` must each hold `height * width` doubles.
 */
enum EbfStatus ebf_dct2_inverse(const double *coeffs, size_t height, size_t width, double *out);

struct EbfSolverConfig ebf_solver_config_default(void);

/**
 * Runs PALM on the deblurring model with eigenvalues `lambda` and noise
 * precision `sigma`. `gamma0` may be NULL, in which case |DCT(y)| is used
 * with zeros lifted to `omega`. `config` may be NULL for defaults.
 *
 * # Safety
 * `lambda`, `y`, and a non-NULL `gamma0` must hold `height * width` doubles;
 * `prior` must be live; `out` must be writable.
 */
enum EbfStatus ebf_palm_solve(const double *lambda,
                              double sigma,
                              size_t height,
                              size_t width,
                              const double *y,
                              const struct EbfPrior *prior,
                              const struct EbfSolverConfig *config,
                              const double *gamma0,
                              struct EbfSolveResult **out);

/**
 * # Safety
 * `result` must be NULL or a handle from [`ebf_palm_solve`] not yet freed.
 */
void ebf_result_free(struct EbfSolveResult *result);

/**
 * Number of coefficients, or 0 for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t ebf_result_len(const struct EbfSolveResult *result);

/**
 * Iterations performed, or 0 for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t ebf_result_iterations(const struct EbfSolveResult *result);

/**
 * True when the relative-change test stopped the run.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
bool ebf_result_converged(const struct EbfSolveResult *result);

/**
 * Objective value after the last iteration, NaN for NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
double ebf_result_final_objective(const struct EbfSolveResult *result);

/**
 * Copies the coefficient vector x (length [`ebf_result_len`]).
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum EbfStatus ebf_result_copy_x(const struct EbfSolveResult *result, double *out, size_t len);

/**
 * Copies the final hyperparameters γ (length [`ebf_result_len`]).
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum EbfStatus ebf_result_copy_gamma(const struct EbfSolveResult *result, double *out, size_t len);

/**
 * Copies the objective trace J⁽⁰⁾..J⁽ᴷ⁾ (length iterations + 1).
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum EbfStatus ebf_result_copy_objectives(const struct EbfSolveResult *result,
                                          double *out,
                                          size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EBF_H */
