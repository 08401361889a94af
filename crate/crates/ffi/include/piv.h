#ifndef PIV_H
#define PIV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdint.h>

typedef enum PivStatus {
  PIV_STATUS_OK = 0,
  PIV_STATUS_NULL_POINTER = 1,
  PIV_STATUS_INVALID_ARGUMENT = 2,
  PIV_STATUS_AMBIGUOUS_DIRECTION = 3,
  PIV_STATUS_SATURATED = 4,
  PIV_STATUS_DOMAIN = 5,
  PIV_STATUS_INTERNAL = 6,
} PivStatus;

typedef enum PivThresholdKind {
  PIV_THRESHOLD_KIND_STATISTICAL = 0,
  PIV_THRESHOLD_KIND_FIXED = 1,
} PivThresholdKind;

typedef enum PivDirection {
  /**
   * Take the sign of the observed estimate.
   */
  PIV_DIRECTION_AUTO = 0,
  PIV_DIRECTION_POSITIVE = 1,
  PIV_DIRECTION_NEGATIVE = 2,
} PivDirection;

typedef enum PivSimMode {
  PIV_SIM_MODE_SAMPLE_ESTIMATOR = 0,
  PIV_SIM_MODE_SAMPLE_INDIVIDUALS = 1,
} PivSimMode;

/**
 * Opaque study handle.
 */
typedef struct PivStudy PivStudy;

/**
 * Summary statistics of the observed study.
 */
typedef struct PivStudyParams {
  double mean_treated_obs;
  double mean_control_obs;
  double var_treated;
  double var_control;
  uint64_t n_obs;
  double prop_treated;
} PivStudyParams;

/**
 * Decision threshold. For `Statistical`, a NaN `critical` means "derive it
 * from `alpha`"; `fixed_value` is read only for `Fixed`.
 */
typedef struct PivThreshold {
  enum PivThresholdKind kind;
  double alpha;
  double critical;
  double fixed_value;
} PivThreshold;

typedef struct PivPoint {
  double treated_un;
  double control_un;
  double piv;
  double probit;
  double delta_hat_ideal;
  double se_ideal;
  double t_ratio;
  double threshold_value;
} PivPoint;

typedef struct PivBounds {
  struct PivPoint lower;
  struct PivPoint upper;
} PivBounds;

typedef struct PivSimResult {
  double piv_hat;
  double mc_stderr;
  uint64_t rejections;
} PivSimResult;

/**
 * Validates the inputs and allocates a study handle into `*out`.
 *
 * # Safety
 * `params` and `threshold` must point to valid structs; `out` must be writable.
 */
enum PivStatus piv_study_new(const struct PivStudyParams *params,
                             const struct PivThreshold *threshold,
                             enum PivDirection direction,
                             struct PivStudy **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `study` must come from [`piv_study_new`] and not be freed twice.
 */
void piv_study_free(struct PivStudy *study);

/**
 * Direction the handle resolved to (`Positive` or `Negative`).
 *
 * # Safety
 * `study` must be a live handle; `out` must be writable.
 */
enum PivStatus piv_study_direction(const struct PivStudy *study, enum PivDirection *out);

/**
 * PIV at one point `(treated_un, control_un)`.
 *
 * # Safety
 * `study` must be a live handle; `out` must be writable.
 */
enum PivStatus piv_compute(const struct PivStudy *study,
                           double treated_un,
                           double control_un,
                           struct PivPoint *out);

/**
 * PIV bounds over the rectangle `[treated_lo, treated_hi] x [control_lo, control_hi]`.
 *
 * # Safety
 * `study` must be a live handle; `out` must be writable.
 */
enum PivStatus piv_bound(const struct PivStudy *study,
                         double treated_lo,
                         double treated_hi,
                         double control_lo,
                         double control_hi,
                         struct PivBounds *out);

/**
 * `treated_un` at which the PIV equals `target`, with `control_un` fixed.
 *
 * # Safety
 * `study` must be a live handle; both output pointers must be writable.
 */
enum PivStatus piv_invert(const struct PivStudy *study,
                          double control_un,
                          double target,
                          double *out_treated_un,
                          double *out_delta_hat_ideal);

/**
 * Monte Carlo estimate of the PIV. Same seed, same result.
 *
 * # Safety
 * `study` must be a live handle; `out` must be writable.
 */
enum PivStatus piv_simulate(const struct PivStudy *study,
                            double treated_un,
                            double control_un,
                            uint64_t replications,
                            uint64_t seed,
                            enum PivSimMode mode,
                            struct PivSimResult *out);

/**
 * Standard normal CDF.
 *
 * # Safety
 * `out` must be writable.
 */
enum PivStatus piv_normal_cdf(double z, double *out);

/**
 * Standard normal quantile for `p` in (0, 1).
 *
 * # Safety
 * `out` must be writable.
 */
enum PivStatus piv_normal_quantile(double p, double *out);

/**
 * Message for the last failed call on this thread, or "" after a success.
 */
const char *piv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *piv_version(void);

#endif  /* PIV_H */
