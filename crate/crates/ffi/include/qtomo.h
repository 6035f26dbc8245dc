#ifndef QTOMO_H
#define QTOMO_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum QtomoStatus {
  QTOMO_STATUS_OK = 0,
  QTOMO_STATUS_NULL_POINTER = 1,
  QTOMO_STATUS_INVALID_ARGUMENT = 2,
  QTOMO_STATUS_DIMENSION_MISMATCH = 3,
  QTOMO_STATUS_SINGULAR_STATE = 4,
  QTOMO_STATUS_NOT_COMPLETELY_POSITIVE = 5,
  QTOMO_STATUS_NUMERICAL = 6,
  QTOMO_STATUS_PANIC = 7,
} QtomoStatus;

typedef enum QtomoScheme {
  QTOMO_SCHEME_TWO_POINTER = 0,
  QTOMO_SCHEME_SINGLE_POINTER = 1,
} QtomoScheme;

// Opaque CPTP channel.
typedef struct QtomoChannel QtomoChannel;

// Opaque reconstruction result.
typedef struct QtomoReconstruction QtomoReconstruction;

// Opaque density matrix.
typedef struct QtomoState QtomoState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *qtomo_last_error(void);

// Library version as a static NUL-terminated string.
const char *qtomo_version(void);

// Channel from a spec string such as `"phase-damping:0.5"`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer.
enum QtomoStatus qtomo_channel_from_spec(const char *spec,
                                         uintptr_t dim,
                                         struct QtomoChannel **out);

// Trace-preserving channel from `count` Kraus operators, each `dim × dim` row-major, stored
// back to back in `re` and `im` (length `count·dim²` each).
//
// # Safety
// `re` and `im` must point to `count·dim²` doubles; `out` must be valid.
enum QtomoStatus qtomo_channel_from_kraus(uintptr_t dim,
                                          uintptr_t count,
                                          const double *re,
                                          const double *im,
                                          struct QtomoChannel **out);

// # Safety
// `channel` must be NULL or a handle from this library not yet freed.
void qtomo_channel_free(struct QtomoChannel *channel);

// `Λ(ρ)` for a `dim × dim` row-major matrix; the output arrays need `dim²` entries.
//
// # Safety
// All pointers must be valid for `dim²` doubles.
enum QtomoStatus qtomo_channel_apply(const struct QtomoChannel *channel,
                                     const double *rho_re,
                                     const double *rho_im,
                                     double *out_re,
                                     double *out_im);

// State from a spec string such as `"maximally-mixed"` or `"thermal:1.0"`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer.
enum QtomoStatus qtomo_state_from_spec(const char *spec, uintptr_t dim, struct QtomoState **out);

// State from a row-major density matrix.
//
// # Safety
// `re` and `im` must point to `dim²` doubles; `out` must be valid.
enum QtomoStatus qtomo_state_from_matrix(uintptr_t dim,
                                         const double *re,
                                         const double *im,
                                         struct QtomoState **out);

// # Safety
// `state` must be NULL or a handle from this library not yet freed.
void qtomo_state_free(struct QtomoState *state);

// Reconstruction from exact covariances.
//
// # Safety
// Handles must be valid; `out` must be a valid pointer.
enum QtomoStatus qtomo_reconstruct_exact(const struct QtomoState *state,
                                         const struct QtomoChannel *channel,
                                         struct QtomoReconstruction **out);

// Reconstruction from simulated weak measurements with `trials` runs per
// correlation at coupling `eps2`.
//
// # Safety
// Handles must be valid; `out` must be a valid pointer.
enum QtomoStatus qtomo_reconstruct_sampled(const struct QtomoState *state,
                                           const struct QtomoChannel *channel,
                                           double eps2,
                                           uint64_t trials,
                                           uint64_t seed,
                                           enum QtomoScheme scheme,
                                           bool correct,
                                           struct QtomoReconstruction **out);

// # Safety
// `rec` must be NULL or a handle from this library not yet freed.
void qtomo_reconstruction_free(struct QtomoReconstruction *rec);

// Number of non-identity basis operators `K = D² − 1`; `M` is `K × K`. Zero for NULL.
//
// # Safety
// `rec` must be NULL or a valid handle.
uintptr_t qtomo_reconstruction_size(const struct QtomoReconstruction *rec);

// Writes `M` row-major into `out` (capacity `len`, at least `K²`).
//
// # Safety
// `out` must be valid for `len` doubles.
enum QtomoStatus qtomo_reconstruction_m(const struct QtomoReconstruction *rec,
                                        double *out,
                                        uintptr_t len);

// Writes `χ` into `out` (capacity `len`, at least `K`).
//
// # Safety
// `out` must be valid for `len` doubles.
enum QtomoStatus qtomo_reconstruction_chi(const struct QtomoReconstruction *rec,
                                          double *out,
                                          uintptr_t len);

// Number of reconstructed Kraus operators. Zero for NULL.
//
// # Safety
// `rec` must be NULL or a valid handle.
uintptr_t qtomo_reconstruction_kraus_count(const struct QtomoReconstruction *rec);

// Writes Kraus operator `index` row-major into `re`/`im` (capacity `len`, at least `D²`).
//
// # Safety
// `re` and `im` must be valid for `len` doubles.
enum QtomoStatus qtomo_reconstruction_kraus_op(const struct QtomoReconstruction *rec,
                                               uintptr_t index,
                                               double *re,
                                               double *im,
                                               uintptr_t len);

// New channel handle holding the reconstructed Kraus operators.
//
// # Safety
// `rec` must be valid and `out` a valid pointer.
enum QtomoStatus qtomo_reconstruction_channel(const struct QtomoReconstruction *rec,
                                              struct QtomoChannel **out);

// `‖Σ K†K − 𝟙‖` of the reconstruction; NaN for NULL.
//
// # Safety
// `rec` must be NULL or a valid handle.
double qtomo_reconstruction_completeness_defect(const struct QtomoReconstruction *rec);

// Spectral-norm error of `M` against the simulated truth; NaN for NULL.
//
// # Safety
// `rec` must be NULL or a valid handle.
double qtomo_reconstruction_delta_m(const struct QtomoReconstruction *rec);

// Largest distance between the reconstructed and true channel outputs over probe states; NaN for NULL.
//
// # Safety
// `rec` must be NULL or a valid handle.
double qtomo_reconstruction_action_error(const struct QtomoReconstruction *rec);

// `N = ⌈4 f² / δ⁴⌉`.
//
// # Safety
// `out` must be a valid pointer.
enum QtomoStatus qtomo_required_trials(double delta, double f_abs, uint64_t *out);

// `ε = √(δ/|f|)`.
//
// # Safety
// `out` must be a valid pointer.
enum QtomoStatus qtomo_optimal_epsilon(double delta, double f_abs, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QTOMO_H */
