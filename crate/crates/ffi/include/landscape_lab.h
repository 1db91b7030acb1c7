#ifndef LANDSCAPE_LAB_H
#define LANDSCAPE_LAB_H

/* Generated by cbindgen from landscape-lab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define LL_OK 0

/**
 * A parameter was out of range or inconsistent.
 */
#define LL_INVALID_ARGUMENT 1

/**
 * An iteration failed to converge or produced a non-finite value.
 */
#define LL_NUMERICAL 2

/**
 * A required input was absent.
 */
#define LL_MISSING_INPUT 3

/**
 * Text input could not be parsed.
 */
#define LL_PARSE 4

/**
 * The operating system reported an I/O failure.
 */
#define LL_IO 5

/**
 * A required pointer argument was null.
 */
#define LL_NULL_POINTER 6

/**
 * The caller's buffer is shorter than the data.
 */
#define LL_BUFFER_TOO_SMALL 7

/**
 * An internal panic was caught at the boundary.
 */
#define LL_PANIC 8

/**
 * Half-sample reflection at the domain walls (the default).
 */
#define LL_BOUNDARY_REFLECT 0

/**
 * Zero extension past the walls.
 */
#define LL_BOUNDARY_ZERO_PAD 1

/**
 * Eigenpairs of -D_h + V, ordered from the bottom of the spectrum.
 */
typedef struct LlEigenSet LlEigenSet;

/**
 * A landscape solve (-D_h + V) u = f together with its right-hand side.
 */
typedef struct LlLandscape LlLandscape;

/**
 * A potential sampled on the interior nodes of a uniform grid on (0, 1).
 */
typedef struct LlPotential LlPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the underlying library; static storage, never freed.
 */
const char *ll_version(void);

/**
 * Message for the most recent failure on the calling thread. The pointer
 * stays valid until the next failing call on the same thread. Never null;
 * empty before any failure.
 */
const char *ll_last_error_message(void);

/**
 * Generate a piecewise-constant random potential: `n` interior nodes,
 * `intervals` equal blocks with independent heights in [0, vmax].
 *
 * # Safety
 * `out` must point to writable storage for one pointer.
 */
int32_t ll_potential_generate(size_t n,
                              size_t intervals,
                              double vmax,
                              uint64_t seed,
                              struct LlPotential **out);

/**
 * Wrap caller-provided node values (copied) as a potential on the uniform
 * grid with `len` interior nodes.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must point to
 * writable storage for one pointer.
 */
int32_t ll_potential_from_values(const double *values, size_t len, struct LlPotential **out);

/**
 * Release a potential handle. Null is a no-op.
 *
 * # Safety
 * `p` must be a pointer previously returned by this library and not yet
 * freed.
 */
void ll_potential_free(struct LlPotential *p);

/**
 * Number of interior nodes, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle from this library.
 */
size_t ll_potential_len(const struct LlPotential *p);

/**
 * Copy the node values into `buf` (capacity `len`).
 *
 * # Safety
 * `p` must be a live handle; `buf` must point to `len` writable doubles.
 */
int32_t ll_potential_values(const struct LlPotential *p, double *buf, size_t len);

/**
 * Sup norm of the potential.
 *
 * # Safety
 * `p` must be a live handle; `out` must point to one writable double.
 */
int32_t ll_potential_sup(const struct LlPotential *p, double *out);

/**
 * The potential's own smoothing time 1 / mean(V), clamped to a sane range.
 *
 * # Safety
 * `p` must be a live handle; `out` must point to one writable double.
 */
int32_t ll_potential_default_time_scale(const struct LlPotential *p, double *out);

/**
 * Convolve with the averaged heat kernel at time `t`, returning a new
 * potential handle. `policy` is one of the LL_BOUNDARY_* codes.
 *
 * # Safety
 * `p` must be a live handle; `out` must point to writable storage for one
 * pointer.
 */
int32_t ll_potential_smooth(const struct LlPotential *p,
                            double t,
                            int32_t policy,
                            struct LlPotential **out);

/**
 * Solve for the `k` lowest eigenpairs of -D_h + V.
 *
 * # Safety
 * `p` must be a live handle; `out` must point to writable storage for one
 * pointer.
 */
int32_t ll_eigenpairs_solve(const struct LlPotential *p, size_t k, struct LlEigenSet **out);

/**
 * Release an eigenpair set. Null is a no-op.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library and not yet
 * freed.
 */
void ll_eigenset_free(struct LlEigenSet *s);

/**
 * Number of pairs in the set, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle from this library.
 */
size_t ll_eigenset_len(const struct LlEigenSet *s);

/**
 * Eigenvalue of pair `i` (0-based, ordered from the bottom).
 *
 * # Safety
 * `s` must be a live handle; `out` must point to one writable double.
 */
int32_t ll_eigenset_lambda(const struct LlEigenSet *s, size_t i, double *out);

/**
 * Worst-node residual of pair `i`, the solver's own accuracy witness.
 *
 * # Safety
 * `s` must be a live handle; `out` must point to one writable double.
 */
int32_t ll_eigenset_residual(const struct LlEigenSet *s, size_t i, double *out);

/**
 * Copy the sup-normalized eigenvector of pair `i` into `buf`.
 *
 * # Safety
 * `s` must be a live handle; `buf` must point to `len` writable doubles.
 */
int32_t ll_eigenset_vector(const struct LlEigenSet *s, size_t i, double *buf, size_t len);

/**
 * Solve (-D_h + V) u = f. A null `rhs` means f = 1 at every node;
 * otherwise `rhs_len` must match the potential's node count.
 *
 * # Safety
 * `p` must be a live handle; `rhs` must be null or point to `rhs_len`
 * readable doubles; `out` must point to writable storage for one pointer.
 */
int32_t ll_landscape_solve(const struct LlPotential *p,
                           const double *rhs,
                           size_t rhs_len,
                           struct LlLandscape **out);

/**
 * Release a landscape handle. Null is a no-op.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library and not yet
 * freed.
 */
void ll_landscape_free(struct LlLandscape *s);

/**
 * Number of nodes in the solution, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle from this library.
 */
size_t ll_landscape_len(const struct LlLandscape *s);

/**
 * Copy the solution values into `buf`.
 *
 * # Safety
 * `s` must be a live handle; `buf` must point to `len` writable doubles.
 */
int32_t ll_landscape_values(const struct LlLandscape *s, double *buf, size_t len);

/**
 * Effective potential (f * k_t) / u of the stored solve, written into
 * `buf`. With the constant right-hand side this is 1/u.
 *
 * # Safety
 * `s` must be a live handle; `buf` must point to `len` writable doubles.
 */
int32_t ll_landscape_effective_potential(const struct LlLandscape *s,
                                         double t,
                                         int32_t policy,
                                         double *buf,
                                         size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LANDSCAPE_LAB_H */
