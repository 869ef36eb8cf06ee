/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef GTL_H
#define GTL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GtlStatus {
  GTL_STATUS_OK = 0,
  GTL_STATUS_NULL_POINTER = 1,
  GTL_STATUS_INVALID_ARGUMENT = 2,
  // The covariance is not a physical state.
  GTL_STATUS_INVALID_STATE = 3,
  // A factorization or eigen-solve failed.
  GTL_STATUS_NUMERICAL = 4,
  // A learner gave up (abort, degenerate geometry, no convergence).
  GTL_STATUS_ALGORITHM_FAILURE = 5,
  GTL_STATUS_PANIC = 6,
} GtlStatus;

typedef enum GtlValidity {
  GTL_VALIDITY_INVALID = 0,
  GTL_VALIDITY_MIXED_VALID = 1,
  GTL_VALIDITY_PURE_VALID = 2,
} GtlValidity;

typedef enum GtlStrategy {
  // Non-adaptive single-mode protocol (n = 1).
  GTL_STRATEGY_ALG_S1 = 0,
  GTL_STRATEGY_HETERODYNE_BASELINE = 1,
  GTL_STRATEGY_PURE = 2,
  GTL_STRATEGY_WIGNER = 3,
  GTL_STRATEGY_PASSIVE = 4,
} GtlStrategy;

// Opaque handle to a Gaussian state.
typedef struct GtlState GtlState;

// Outcome of `gtl_learn`.
typedef struct GtlLearnReport {
  // Copies the oracle handed out.
  uint64_t copies;
  // Achieved error in the strategy's metric.
  double error;
  // error ≤ ε and the learner did not fail.
  bool success;
} GtlLearnReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next gtl_* call on the same thread.
const char *gtl_last_error_message(void);

// Static NUL-terminated version string.
const char *gtl_version(void);

// New state from a mean of length 2n (NULL for zero) and a row-major 2n×2n
// covariance.
//
// # Safety
// `mean` is NULL or points to 2n doubles; `sigma` points to 4n² doubles;
// `out` is writable.
enum GtlStatus gtl_state_new(size_t n_modes,
                             const double *mean,
                             const double *sigma,
                             struct GtlState **out);

// n-mode vacuum.
//
// # Safety
// `out` is writable.
enum GtlStatus gtl_state_vacuum(size_t n_modes, struct GtlState **out);

// Single-mode state with covariance R(θ)diag(b, a)R(θ)ᵀ (variance b along
// (cos θ, sin θ)) and mean (mx, mp).
//
// # Safety
// `out` is writable.
enum GtlStatus gtl_state_single_mode(double mx,
                                     double mp,
                                     double b,
                                     double a,
                                     double theta,
                                     struct GtlState **out);

// Releases a state; NULL is ignored.
//
// # Safety
// `state` is NULL or came from a gtl_* constructor and was not freed.
void gtl_state_free(struct GtlState *state);

// # Safety
// `state` is a live handle; `out` is writable.
enum GtlStatus gtl_state_n_modes(const struct GtlState *state, size_t *out);

// Copies the covariance, row-major, into `buf` of `len` = 4n² doubles.
//
// # Safety
// `state` is a live handle; `buf` points to `len` writable doubles.
enum GtlStatus gtl_state_covariance(const struct GtlState *state, double *buf, size_t len);

// Copies the mean into `buf` of `len` = 2n doubles.
//
// # Safety
// `state` is a live handle; `buf` points to `len` writable doubles.
enum GtlStatus gtl_state_mean(const struct GtlState *state, double *buf, size_t len);

// Classifies a covariance without building a state. `min_nu` (nullable)
// receives the smallest symplectic eigenvalue, 0 when not positive definite.
//
// # Safety
// `sigma` points to 4n² doubles; `class_out` is writable; `min_nu` is NULL
// or writable.
enum GtlStatus gtl_validate_covariance(size_t n_modes,
                                       const double *sigma,
                                       enum GtlValidity *class_out,
                                       double *min_nu);

// Squared Uhlmann fidelity.
//
// # Safety
// `a`, `b` are live handles; `out` is writable.
enum GtlStatus gtl_fidelity(const struct GtlState *a, const struct GtlState *b, double *out);

// Probability of the all-vacuum photon-counting outcome.
//
// # Safety
// `state` is a live handle; `out` is writable.
enum GtlStatus gtl_vacuum_probability(const struct GtlState *state, double *out);

// Lower and upper bounds on the trace distance. `mc_samples` > 0 adds a
// Monte-Carlo lower bound seeded by `seed`.
//
// # Safety
// `a`, `b` are live handles; `lower`, `upper` are writable.
enum GtlStatus gtl_trace_distance_bounds(const struct GtlState *a,
                                         const struct GtlState *b,
                                         uint64_t mc_samples,
                                         uint64_t seed,
                                         double *lower,
                                         double *upper);

// KL divergence between the two Wigner functions.
//
// # Safety
// `a`, `b` are live handles; `out` is writable.
enum GtlStatus gtl_wigner_kl(const struct GtlState *a, const struct GtlState *b, double *out);

// Learns `truth` from simulated measurements. `budget` = 0 uses the
// strategy's calibrated copy count. The estimate (nullable out) must be
// released with gtl_state_free. A learner that gives up is not a call
// failure: the report then has success = false and error = 1, and
// `estimate` is set to NULL.
//
// # Safety
// `truth` is a live handle; `report` is writable; `estimate` is NULL or
// writable.
enum GtlStatus gtl_learn(enum GtlStrategy strategy,
                         const struct GtlState *truth,
                         double energy,
                         double eps,
                         double delta,
                         uint64_t budget,
                         uint64_t seed,
                         struct GtlLearnReport *report,
                         struct GtlState **estimate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GTL_H */
