#ifndef TRMOA_TRMOA_H
#define TRMOA_TRMOA_H

/*
 * C interface to the regret-minimizing billboard slot allocator.
 *
 * Every call returns a trmoa_status. On failure the thread-local message from
 * trmoa_last_error() describes the cause. Handles are opaque and owned by the
 * caller; release them with the matching *_free function (NULL is accepted).
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TRMOA_API __declspec(dllexport)
#else
#define TRMOA_API __attribute__((visibility("default")))
#endif

typedef enum trmoa_status {
  TRMOA_OK = 0,
  TRMOA_E_INVALID_ARGUMENT = 1,
  TRMOA_E_PARSE = 2,
  TRMOA_E_IO = 3,
  TRMOA_E_GUARD_RAIL = 4,
  TRMOA_E_VALIDATION = 5,
  TRMOA_E_INTERNAL = 6
} trmoa_status;

typedef enum trmoa_algorithm {
  TRMOA_ALGO_BG = 0,
  TRMOA_ALGO_RG = 1,
  TRMOA_ALGO_RLS = 2,
  TRMOA_ALGO_RANDOM = 3,
  TRMOA_ALGO_ORACLE = 4
} trmoa_algorithm;

typedef enum trmoa_score_context {
  TRMOA_SCORE_TAG = 0,
  TRMOA_SCORE_FULL = 1
} trmoa_score_context;

typedef enum trmoa_score_denominator {
  TRMOA_DENOM_COST = 0,
  TRMOA_DENOM_INFLUENCE = 1
} trmoa_score_denominator;

typedef struct trmoa_instance trmoa_instance;
typedef struct trmoa_result trmoa_result;

typedef struct trmoa_generator_params {
  double alpha;
  double beta;
  uint64_t users;
  uint64_t boards;
  uint64_t tags;
  int64_t t1;
  int64_t t2;
  int64_t slot_duration;
  double gamma;
  uint64_t seed;
} trmoa_generator_params;

typedef struct trmoa_solver_config {
  trmoa_algorithm algorithm;
  double epsilon;
  uint32_t rls_iters;
  uint64_t seed;
  double delta;
  double omega;
  double gamma;
  trmoa_score_context score_context;
  trmoa_score_denominator score_denominator;
  int early_stop;
  /* Forces the rg sample size when non-zero. */
  uint64_t rg_sample_override;
  uint64_t oracle_max_slots;
  uint64_t oracle_max_advertisers;
} trmoa_solver_config;

typedef struct trmoa_ingest_options {
  /* Zero-valued has_t1 / has_t2 derive the horizon from the records. */
  int has_t1;
  int64_t t1;
  int has_t2;
  int64_t t2;
  int64_t slot_duration;
  double gamma;
  uint64_t seed;
  int keep_unseen_boards;
} trmoa_ingest_options;

typedef struct trmoa_instance_stats {
  uint64_t users;
  uint64_t trajectory_records;
  uint64_t affinities;
  uint64_t boards;
  uint64_t slots;
  uint64_t advertisers;
  uint64_t tags;
  double supply;
  double total_demand;
} trmoa_instance_stats;

typedef struct trmoa_result_summary {
  double total_regret;
  double excessive_regret;
  double unsatisfied_regret;
  uint64_t satisfied_advertisers;
  uint64_t allocated_slots;
  uint64_t unassigned_slots;
  double wall_ms;
  uint64_t rng_draws;
  /* rls only; has_warm_start is zero otherwise. */
  int has_warm_start;
  double warm_start_regret;
  uint64_t improvements;
} trmoa_result_summary;

typedef struct trmoa_sweep_summary {
  uint64_t rows;
  uint64_t flagged;
} trmoa_sweep_summary;

TRMOA_API const char* trmoa_version(void);
/* Message of the last failed call on this thread; empty after a success. */
TRMOA_API const char* trmoa_last_error(void);

TRMOA_API void trmoa_generator_params_default(trmoa_generator_params* params);
TRMOA_API void trmoa_solver_config_default(trmoa_solver_config* config);
TRMOA_API void trmoa_ingest_options_default(trmoa_ingest_options* options);

/* Parses "bg", "rg", "rls", "random" or "oracle". */
TRMOA_API trmoa_status trmoa_algorithm_parse(const char* name, trmoa_algorithm* out);

TRMOA_API trmoa_status trmoa_instance_generate(const trmoa_generator_params* params,
                                               trmoa_instance** out);
/* *log receives newline-separated ingest notes, freed with trmoa_string_free; may be NULL. */
TRMOA_API trmoa_status trmoa_instance_ingest(const char* trajectories, const char* affinities,
                                             const char* billboards, const char* advertisers,
                                             const trmoa_ingest_options* options,
                                             trmoa_instance** out, char** log);
TRMOA_API trmoa_status trmoa_instance_load(const char* dir, trmoa_instance** out);
TRMOA_API trmoa_status trmoa_instance_save(const trmoa_instance* instance, const char* dir);
TRMOA_API void trmoa_instance_free(trmoa_instance* instance);

/* TRMOA_E_VALIDATION with the violations joined in trmoa_last_error(). */
TRMOA_API trmoa_status trmoa_instance_validate(const trmoa_instance* instance);
TRMOA_API trmoa_status trmoa_instance_stats_get(const trmoa_instance* instance, double gamma,
                                                trmoa_instance_stats* out);

TRMOA_API trmoa_status trmoa_solve(const trmoa_instance* instance,
                                   const trmoa_solver_config* config, trmoa_result** out);
TRMOA_API trmoa_status trmoa_result_summary_get(const trmoa_result* result,
                                                trmoa_result_summary* out);
/* Canonical allocation text; free with trmoa_string_free. */
TRMOA_API trmoa_status trmoa_result_serialize(const trmoa_result* result, char** out);
TRMOA_API trmoa_status trmoa_result_write_trace(const trmoa_result* result, const char* path);
TRMOA_API void trmoa_result_free(trmoa_result* result);

/* Runs the sweep described by a grid file, writing results under out_dir.
 * Non-zero overrides replace the grid file's seeds, jobs and algorithm list
 * (comma-separated names). */
TRMOA_API trmoa_status trmoa_sweep_run(const char* grid_file, const char* out_dir,
                                       const char* algorithms, uint64_t seeds, uint64_t jobs,
                                       trmoa_sweep_summary* out);

TRMOA_API trmoa_status trmoa_rg_sample_size(uint64_t remaining, double epsilon, uint64_t* out);

TRMOA_API void trmoa_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif
