/* C interface to the sequential Monte Carlo core: opaque handles, integer
 * status codes, JSON strings for structured data. Every function is
 * thread-safe on distinct handles; error text is per thread. */

#ifndef UDSMC_H
#define UDSMC_H

#include <stdint.h>

#if defined(_WIN32)
#define UDSMC_API __declspec(dllexport)
#else
#define UDSMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; zero is success. Values mirror the library's internal
 * failure identifiers one-to-one. */
typedef enum udsmc_status {
  UDSMC_OK = 0,
  UDSMC_E_INVALID_ARGUMENT,
  UDSMC_E_PARSE,
  UDSMC_E_IO,
  UDSMC_E_ALL_PARTICLES_DEAD,
  UDSMC_E_BUDGET_EXHAUSTED,
  UDSMC_E_NO_MASS,
  UDSMC_E_TOO_FEW_POSITIVE,
  UDSMC_E_TOO_LARGE,
  UDSMC_E_DEGENERATE_FRAME,
  UDSMC_E_UNKNOWN_AMINO_ACID,
  UDSMC_E_MISSING_ATOM_TYPE,
  UDSMC_E_RANGE_TABLE_MISS,
  UDSMC_E_ASYMMETRIC_ENTRY,
  UDSMC_E_BAD_DIMENSION,
  UDSMC_E_BAD_NORMALIZATION,
  UDSMC_E_NON_MONOTONE_RANGE,
  UDSMC_E_EMPTY_STRUCTURE,
  UDSMC_E_MISSING_ATOM,
  UDSMC_E_ORACLE_UNAVAILABLE,
  UDSMC_E_INTERNAL
} udsmc_status;

typedef struct udsmc_model udsmc_model;
typedef struct udsmc_run udsmc_run;

/* Static strings; never freed by the caller. */
UDSMC_API const char* udsmc_version(void);
UDSMC_API const char* udsmc_status_name(udsmc_status s);

/* Message and locating index (step or line; -1 when unset) of the calling
 * thread's most recent failure. Valid until the thread's next udsmc_ call. */
UDSMC_API const char* udsmc_last_error(void);
UDSMC_API long udsmc_last_error_detail(void);

/* Frees a string returned through a char** output. */
UDSMC_API void udsmc_string_free(char* s);

/* Builds a model from JSON configuration:
 *   {"kind": "toy-hmm" | "constrained-chain" | "protein", ...}
 * statistics_json is a JSON array of statistic specs or NULL for the model's
 * default. base_dir prefixes relative file paths in protein configs; NULL
 * means the working directory. */
UDSMC_API udsmc_status udsmc_model_create(const char* model_json,
                                          const char* statistics_json,
                                          const char* base_dir,
                                          udsmc_model** out_model);
UDSMC_API void udsmc_model_free(udsmc_model* model);

UDSMC_API int udsmc_model_horizon(const udsmc_model* model);
UDSMC_API int udsmc_model_state_dim(const udsmc_model* model);

/* Upsampling-downsampling run: n survivors per step, m children per
 * particle. threads parallelizes candidate generation; results are
 * bit-identical at any thread count. */
UDSMC_API udsmc_status udsmc_run_updown(const udsmc_model* model, long n,
                                        long m, uint64_t seed, int threads,
                                        udsmc_run** out_run);

/* Sequential importance sampling with per-step resampling; scheme is
 * "multinomial" | "stratified" | "residual". */
UDSMC_API udsmc_status udsmc_run_sisr(const udsmc_model* model, long n,
                                      const char* scheme, uint64_t seed,
                                      udsmc_run** out_run);

/* Plain importance sampling over full paths. Stops at n_target positive
 * draws, max_draws attempts, or max_proposals proposed states, whichever
 * comes first; max_proposals 0 means no proposal cap. */
UDSMC_API udsmc_status udsmc_run_importance(const udsmc_model* model,
                                            long n_target, long long max_draws,
                                            long long max_proposals,
                                            uint64_t seed,
                                            udsmc_run** out_run);
UDSMC_API void udsmc_run_free(udsmc_run* run);

/* 1 when the run lost every particle, else 0. */
UDSMC_API int udsmc_run_died(const udsmc_run* run);

/* Run diagnostics as JSON (allocated; free with udsmc_string_free). */
UDSMC_API udsmc_status udsmc_run_diagnostics(const udsmc_run* run,
                                             char** out_json);

/* Weighted estimates of the model's statistics over the run's final
 * population, as JSON:
 *   {"values": {name: value, ...}, "n_particles": ..., "n_distinct": ...,
 *    "weight_entropy": ...}
 * UDSMC_E_NO_MASS when the run died. */
UDSMC_API udsmc_status udsmc_run_estimate(const udsmc_run* run,
                                          char** out_json);

/* Exact expectations of the model's statistics by full path enumeration;
 * finite-state models only. JSON: {"values": {name: value, ...}}. */
UDSMC_API udsmc_status udsmc_enumerate_exact(const udsmc_model* model,
                                             char** out_json);

/* Experiment driver; kind is "variance" | "converge" | "profile". The config
 * may omit "experiment" (filled from kind) but must not contradict it.
 * Writes CSV outputs and a run.json sidecar into out_dir. seed_override < 0
 * keeps the config seed. base_dir as for udsmc_model_create. */
UDSMC_API udsmc_status udsmc_experiment_run(const char* kind,
                                            const char* config_json,
                                            const char* out_dir, int threads,
                                            int64_t seed_override,
                                            const char* base_dir);

/* Synthetic input generator: writes potential.tbl, dihedrals.tbl,
 * closure.tbl, host.pdb, gen.json into out_dir. config_json tweaks the
 * generator defaults; NULL or empty means all defaults. */
UDSMC_API udsmc_status udsmc_generate_tables(const char* config_json,
                                             uint64_t seed,
                                             const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* UDSMC_H */
