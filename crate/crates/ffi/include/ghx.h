#ifndef GHX_H
#define GHX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status code of every fallible call.
typedef enum GhxStatus {
  GHX_STATUS_OK = 0,
  GHX_STATUS_NULL_POINTER = 1,
  GHX_STATUS_INVALID_ARGUMENT = 2,
  GHX_STATUS_DIMENSION_MISMATCH = 3,
  GHX_STATUS_NOT_HERMITIAN = 4,
  GHX_STATUS_NOT_POSITIVE_DEFINITE = 5,
  GHX_STATUS_OUTSIDE_CONE = 6,
  GHX_STATUS_NUMERICAL = 7,
  GHX_STATUS_BUFFER_TOO_SMALL = 8,
  GHX_STATUS_PANIC = 9,
} GhxStatus;

// A Hermitian matrix.
typedef struct GhxHermitian GhxHermitian;

// A positive-definite metric with its factorization.
typedef struct GhxMetric GhxMetric;

// Outcome of the Gårding inequality check.
typedef struct GhxGardingResult {
  double lhs;
  double rhs;
  double gap;
  bool holds;
  bool equality;
} GhxGardingResult;

// Outcome of the mixed Hodge-index check.
typedef struct GhxTheoremResult {
  uintptr_t n_plus;
  uintptr_t n_zero;
  uintptr_t n_minus;
  // Largest eigenvalue of the form on the primitive hyperplane.
  double max_restricted_eigenvalue;
  double spectral_scale;
  bool holds;
} GhxTheoremResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ghx_version(void);

// Length in bytes of the last error message on this thread, without the
// terminating NUL; 0 when there is none.
uintptr_t ghx_last_error_length(void);

// Copies the last error message (NUL-terminated, truncated to fit) into
// `buf`; returns the number of bytes written without the NUL.
//
// # Safety
// `buf` must be valid for `capacity` bytes, or null with `capacity == 0`.
uintptr_t ghx_last_error_message(char *buf, uintptr_t capacity);

// Builds a Hermitian matrix from row-major real and imaginary parts
// (`im` may be null for a real symmetric matrix).
//
// # Safety
// `re` (and `im` when non-null) must point to `n·n` doubles; `out` must be
// valid for one write.
enum GhxStatus ghx_hermitian_new(uintptr_t n,
                                 const double *re,
                                 const double *im,
                                 struct GhxHermitian **out);

// # Safety
// `h` must come from `ghx_hermitian_new` and not be freed twice; null is a
// no-op.
void ghx_hermitian_free(struct GhxHermitian *h);

// Dimension of `h`, or 0 for null.
//
// # Safety
// `h` must be null or a live handle.
uintptr_t ghx_hermitian_dim(const struct GhxHermitian *h);

// Builds a metric from a positive-definite Hermitian matrix.
//
// # Safety
// `g` must be a live handle; `out` must be valid for one write.
enum GhxStatus ghx_metric_new(const struct GhxHermitian *g, struct GhxMetric **out);

// The identity metric of dimension `n`.
//
// # Safety
// `out` must be valid for one write.
enum GhxStatus ghx_metric_identity(uintptr_t n, struct GhxMetric **out);

// # Safety
// `g` must come from a metric constructor and not be freed twice; null is
// a no-op.
void ghx_metric_free(struct GhxMetric *g);

// Roots of `det(A − λG)` in ascending order, written to `out[0..n]`.
//
// # Safety
// Handles must be live; `out` must be valid for `capacity` doubles.
enum GhxStatus ghx_pencil_eigenvalues(const struct GhxHermitian *a,
                                      const struct GhxMetric *g,
                                      double *out,
                                      uintptr_t capacity);

// `σ_k(A)` relative to `G`.
//
// # Safety
// Handles must be live; `out` must be valid for one write.
enum GhxStatus ghx_sigma(const struct GhxHermitian *a,
                         const struct GhxMetric *g,
                         uintptr_t k,
                         double *out);

// The mixed form `D(X_1, …, X_m)` of `σ_m` with `m = count`.
//
// # Safety
// `args` must hold `count` live handles; `out` must be valid for one write.
enum GhxStatus ghx_mixed_sigma(const struct GhxHermitian *const *args,
                               uintptr_t count,
                               const struct GhxMetric *g,
                               double *out);

// Membership of `A` in `Γ_m`; `min_margin` receives the smallest
// normalized `σ_l`, `l ≤ m` (either output may be null).
//
// # Safety
// Handles must be live; non-null outputs must be valid for one write.
enum GhxStatus ghx_in_gamma_m(const struct GhxHermitian *a,
                              const struct GhxMetric *g,
                              uintptr_t m,
                              double tol,
                              bool *member,
                              double *min_margin);

// `D(B_1, …, B_m) ≥ ∏ σ_m(B_i)^{1/m}` for `B_i ∈ Γ_m`, `m = count`.
//
// # Safety
// `args` must hold `count` live handles; `out` must be valid for one write.
enum GhxStatus ghx_garding_gap(const struct GhxHermitian *const *args,
                               uintptr_t count,
                               const struct GhxMetric *g,
                               struct GhxGardingResult *out);

// The mixed Hodge-index check for `α_1, …, α_{m−1}`, `m = count + 1`.
//
// # Safety
// `alphas` must hold `count` live handles; `out` must be valid for one
// write.
enum GhxStatus ghx_verify_theorem_a(const struct GhxHermitian *const *alphas,
                                    uintptr_t count,
                                    const struct GhxMetric *g,
                                    struct GhxTheoremResult *out);

// `a_k = D(α^{(k)}, β^{(m−k)})` for `k = 0..=m` into `sequence[0..=m]`;
// `holds` receives whether the sequence is log-concave.
//
// # Safety
// Handles must be live; `sequence` must be valid for `capacity` doubles and
// `holds` (when non-null) for one write.
enum GhxStatus ghx_log_concavity(const struct GhxHermitian *alpha,
                                 const struct GhxHermitian *beta,
                                 const struct GhxMetric *g,
                                 uintptr_t m,
                                 double *sequence,
                                 uintptr_t capacity,
                                 bool *holds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GHX_H */
