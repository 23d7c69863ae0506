#ifndef COVCTL_H
#define COVCTL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CovStatus {
  COV_STATUS_OK = 0,
  COV_STATUS_NULL_POINTER = 1,
  COV_STATUS_INVALID_UTF8 = 2,
  COV_STATUS_INVALID_ARGUMENT = 3,
  COV_STATUS_PARSE = 4,
  COV_STATUS_IO = 5,
  COV_STATUS_GRAPH = 6,
  COV_STATUS_ALGORITHM = 7,
  COV_STATUS_ITERATION_CAP = 8,
  COV_STATUS_INVARIANT_BREACH = 9,
  COV_STATUS_PANIC = 10,
} CovStatus;

/**
 * Environment graph with its distance oracle.
 */
typedef struct CovEnv CovEnv;

/**
 * Result of one algorithm run.
 */
typedef struct CovRun CovRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a graph document (`weights`, `edges`, optional `coords`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CovStatus cov_env_from_json(const char *json, struct CovEnv **out);

/**
 * Builds a generated shape from a JSON shape spec such as
 * `{"kind":"chain","m":20,"valued":10}`. `epsilon` is the weight of
 * unvalued nodes.
 *
 * # Safety
 * `shape_json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CovStatus cov_env_generate(const char *shape_json,
                                uint64_t seed,
                                double epsilon,
                                struct CovEnv **out);

/**
 * Loads an OR-library p-median file. Edge costs become hop counts
 * `max(1, round(cost / cost_scale))`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CovStatus cov_env_load_orlib(const char *path,
                                  double cost_scale,
                                  double epsilon,
                                  struct CovEnv **out);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `env` must be null or a live handle.
 */
size_t cov_env_node_count(const struct CovEnv *env);

/**
 * Serializes the graph; release the string with `cov_string_free`.
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum CovStatus cov_env_to_json(const struct CovEnv *env, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void cov_string_free(char *s);

/**
 * # Safety
 * `env` must be null or a handle not freed before.
 */
void cov_env_free(struct CovEnv *env);

/**
 * Objective `G` of the allocation `positions[0..n]`.
 *
 * # Safety
 * `env` must be a live handle, `positions` must point to `n` node ids and
 * `out` must be a valid pointer.
 */
enum CovStatus cov_objective(const struct CovEnv *env,
                             const size_t *positions,
                             size_t n,
                             double *out);

/**
 * Runs `alg` (`nbo`, `vvp`, `sota`, `cgr` or `opt`) with `n_agents` agents.
 * The initial allocation is drawn uniformly from `seed`, as in a trial.
 *
 * # Safety
 * `env` must be a live handle, `alg` a NUL-terminated string and `out` a
 * valid pointer.
 */
enum CovStatus cov_run(const struct CovEnv *env,
                       const char *alg,
                       size_t n_agents,
                       uint64_t seed,
                       struct CovRun **out);

/**
 * Objective of the final allocation, or NaN for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
double cov_run_objective(const struct CovRun *run);

/**
 * # Safety
 * `run` must be null or a live handle.
 */
uint64_t cov_run_iterations(const struct CovRun *run);

/**
 * # Safety
 * `run` must be null or a live handle.
 */
bool cov_run_converged(const struct CovRun *run);

/**
 * Copies up to `cap` agent positions into `buf` and returns the agent
 * count. Pass `buf = NULL` to query the count.
 *
 * # Safety
 * `run` must be null or a live handle; `buf` must be null or hold `cap`
 * elements.
 */
size_t cov_run_positions(const struct CovRun *run, size_t *buf, size_t cap);

/**
 * # Safety
 * `run` must be null or a handle not freed before.
 */
void cov_run_free(struct CovRun *run);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *cov_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVCTL_H */
