#ifndef LINDSPEC_H
#define LINDSPEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_ARGUMENT = 2,
  LS_STATUS_DEGENERATE_BLOCK = 3,
  LS_STATUS_RESONANCE = 4,
  LS_STATUS_DIVERGENT_SPECTRUM = 5,
  LS_STATUS_SIZE_GUARD = 6,
  LS_STATUS_NUMERICAL = 7,
  LS_STATUS_PANIC = 8,
} LsStatus;

/**
 * Opaque eigensystem handle. Owns a copy of the model it was solved from.
 */
typedef struct LsEigensystem LsEigensystem;

/**
 * Opaque model handle.
 */
typedef struct LsModel LsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *ls_last_error(void);

/**
 * Single-emitter cavity model with photon cutoff `cutoff`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LsStatus ls_model_jc(double g,
                          double delta,
                          double kappa,
                          double gamma,
                          size_t cutoff,
                          struct LsModel **out);

/**
 * Single-emitter cavity model with pure emitter dephasing `gamma_z`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LsStatus ls_model_jc_dephasing(double g,
                                    double delta,
                                    double kappa,
                                    double gamma,
                                    double gamma_z,
                                    size_t cutoff,
                                    struct LsModel **out);

/**
 * Two emitters sharing one cavity mode.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LsStatus ls_model_tc2(double g1,
                           double g2,
                           double delta1,
                           double delta2,
                           double gamma1,
                           double gamma2,
                           double kappa,
                           size_t cutoff,
                           struct LsModel **out);

/**
 * Hilbert-space dimension of the model, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a handle returned by a model builder.
 */
size_t ls_model_dimension(const struct LsModel *model);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void ls_model_free(struct LsModel *model);

/**
 * Computes the full Liouvillian eigensystem. Non-positive tolerances select the defaults.
 *
 * # Safety
 * `model` must be a live model handle and `out` valid writable storage for one handle.
 */
enum LsStatus ls_solve(const struct LsModel *model,
                       double degeneracy_tol,
                       double resonance_tol,
                       struct LsEigensystem **out);

/**
 * Number of eigenmodes, `dim * dim`, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live eigensystem handle.
 */
size_t ls_eigensystem_len(const struct LsEigensystem *sys);

/**
 * Hilbert-space dimension the eigensystem acts on, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live eigensystem handle.
 */
size_t ls_eigensystem_dimension(const struct LsEigensystem *sys);

/**
 * Writes all eigenvalues, ordered as the modes, into two arrays of length `len`.
 *
 * # Safety
 * `re` and `im` must point to `len` writable doubles.
 */
enum LsStatus ls_eigenvalues(const struct LsEigensystem *sys, double *re, double *im, size_t len);

/**
 * Writes mode `index` as a dense operator. `left != 0` selects the left eigenvector.
 *
 * # Safety
 * `re` and `im` must each point to `dim * dim` writable doubles.
 */
enum LsStatus ls_eigenvector(const struct LsEigensystem *sys,
                             size_t index,
                             int32_t left,
                             double *re,
                             double *im);

/**
 * Propagates the density matrix `rho0` to time `t` and writes the result.
 *
 * # Safety
 * All four arrays must hold `dim * dim` doubles; the output pair must be writable.
 */
enum LsStatus ls_evolve(const struct LsEigensystem *sys,
                        const double *rho_re,
                        const double *rho_im,
                        double t,
                        double *out_re,
                        double *out_im);

/**
 * Emission spectrum of the model's emitter starting from basis state `(n, j)`,
 * with `j` 1-based inside excitation block `n`. Writes the unnormalized spectrum to
 * `s` and the normalized one to `normalized` (which may be null).
 *
 * # Safety
 * `omega` and `s` must hold `points` doubles; `normalized` must be null or hold `points`.
 */
enum LsStatus ls_spectrum(const struct LsEigensystem *sys,
                          size_t n,
                          size_t j,
                          const double *omega,
                          size_t points,
                          double *s,
                          double *normalized);

/**
 * Releases an eigensystem handle. Null is ignored.
 *
 * # Safety
 * `sys` must be null or a handle not yet freed.
 */
void ls_eigensystem_free(struct LsEigensystem *sys);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINDSPEC_H */
