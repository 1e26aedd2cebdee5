#ifndef COOPDESIGN_H
#define COOPDESIGN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_ARGUMENT = 2,
  CD_STATUS_PREMISE_VIOLATION = 3,
  CD_STATUS_INTERNAL = 4,
  CD_STATUS_PANIC = 5,
} CdStatus;

typedef enum CdOutcome {
  CD_OUTCOME_NONE = 0,
  CD_OUTCOME_ONLY_GOOD = 1,
  CD_OUTCOME_ONLY_BAD = 2,
  CD_OUTCOME_TOTAL = 3,
} CdOutcome;

typedef enum CdFallback {
  CD_FALLBACK_NO_FALLBACK = 0,
  CD_FALLBACK_KEEP_TOGETHER_TOTAL = 1,
  CD_FALLBACK_RESHUFFLE_NONE = 2,
} CdFallback;

/**
 * Opaque two-game environment.
 */
typedef struct CdEnvironment CdEnvironment;

/**
 * Opaque designed reactive assignment.
 */
typedef struct CdReactiveDesign CdReactiveDesign;

/**
 * Opaque two-task environment.
 */
typedef struct CdTaskEnvironment CdTaskEnvironment;

/**
 * Two-game environment.
 */
typedef struct CdEnvironmentParams {
  double delta;
  double p_good;
  double p_bad;
  double c_good;
  double c_bad;
  double d_good;
  double d_bad;
  double v_good;
  double v_bad;
} CdEnvironmentParams;

/**
 * Optimal reshuffling. `r_star` is NaN when no rate isolates good-game
 * cooperation.
 */
typedef struct CdReshuffleReport {
  bool feasible;
  double r_star;
  double r;
  double delta_effective;
  enum CdOutcome outcome;
  enum CdFallback fallback;
  double social_value;
} CdReshuffleReport;

/**
 * Two-task environment.
 */
typedef struct CdTaskParams {
  double delta;
  double a_good;
  double a_bad;
  double q_good;
  double q_bad;
  double c_good;
  double c_bad;
  double d_good;
  double d_bad;
  double v_good;
  double v_bad;
} CdTaskParams;

typedef struct CdReactiveSummary {
  bool observe_good;
  uint64_t nb;
  double x;
  double bad_share;
  double coop_mass;
  double social_value;
  size_t state_count;
} CdReactiveSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Numbers are read through their shortest decimal form, so `0.6` is exactly
 * `3/5` in exact mode.
 *
 * # Safety
 * `params` must point to a valid struct and `out` to writable storage.
 */
enum CdStatus cd_environment_new(const struct CdEnvironmentParams *params,
                                 struct CdEnvironment **out);

/**
 * # Safety
 * `env` must come from [`cd_environment_new`] and not be freed twice.
 */
void cd_environment_free(struct CdEnvironment *env);

/**
 * # Safety
 * `env` must be a live handle and `out` writable.
 */
enum CdStatus cd_classify(const struct CdEnvironment *env, bool exact, enum CdOutcome *out);

/**
 * # Safety
 * `env` must be a live handle and `out` writable.
 */
enum CdStatus cd_design_reshuffle(const struct CdEnvironment *env,
                                  bool exact,
                                  struct CdReshuffleReport *out);

/**
 * # Safety
 * `params` must point to a valid struct and `out` to writable storage.
 */
enum CdStatus cd_task_environment_new(const struct CdTaskParams *params,
                                      struct CdTaskEnvironment **out);

/**
 * # Safety
 * `env` must come from [`cd_task_environment_new`] and not be freed twice.
 */
void cd_task_environment_free(struct CdTaskEnvironment *env);

/**
 * Writes NaN when no assignment weight sustains total cooperation.
 *
 * # Safety
 * `env` must be a live handle and `out` writable.
 */
enum CdStatus cd_nu_coop(const struct CdTaskEnvironment *env, bool exact, double *out);

/**
 * # Safety
 * `env` must be a live handle and `out` writable.
 */
enum CdStatus cd_optimal_static_value(const struct CdTaskEnvironment *env, bool exact, double *out);

/**
 * # Safety
 * `env` must be a live handle and `out` writable.
 */
enum CdStatus cd_design_reactive(const struct CdTaskEnvironment *env,
                                 bool observe_good,
                                 bool exact,
                                 struct CdReactiveDesign **out);

/**
 * # Safety
 * `design` must be a live handle and `out` writable.
 */
enum CdStatus cd_reactive_summary(const struct CdReactiveDesign *design,
                                  struct CdReactiveSummary *out);

/**
 * Stationary probability of chain state `index`.
 *
 * # Safety
 * `design` must be a live handle and `out` writable.
 */
enum CdStatus cd_reactive_steady_state(const struct CdReactiveDesign *design,
                                       size_t index,
                                       double *out);

/**
 * Graphviz source for the chain; owned by the handle.
 *
 * # Safety
 * `design` must be a live handle. Returns null for a null handle.
 */
const char *cd_reactive_dot(const struct CdReactiveDesign *design);

/**
 * # Safety
 * `design` must come from [`cd_design_reactive`] and not be freed twice.
 */
void cd_reactive_free(struct CdReactiveDesign *design);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *cd_last_error(void);

const char *cd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COOPDESIGN_H */
