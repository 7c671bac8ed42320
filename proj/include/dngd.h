/*
 * Copyright 2026 The dngd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef DNGD_H_
#define DNGD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DNGD_API __declspec(dllexport)
#else
#define DNGD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status; on failure dngd_last_error() describes it. */
typedef enum {
  DNGD_OK = 0,
  DNGD_INVALID_ARGUMENT = 1,
  DNGD_DIMENSION_MISMATCH = 2,
  DNGD_NON_FINITE = 3,
  DNGD_NUMERICAL_FAILURE = 4,
  DNGD_MEMORY_BUDGET = 5,
  DNGD_CONFIG_ERROR = 6,
  DNGD_IO_ERROR = 7,
  DNGD_INTERNAL_ERROR = 8
} dngd_status;

DNGD_API const char* dngd_version(void);
DNGD_API const char* dngd_status_string(dngd_status status);
/* Message of the last failed call on this thread; "" after a success. */
DNGD_API const char* dngd_last_error(void);

/* One optimizer iteration. NaN marks an absent value (rel_l2 when not
   evaluated, lambda for first-order methods, ga_ratio without GA). */
typedef struct {
  size_t iteration;
  double wall_time_s;
  double loss;
  double rel_l2;
  double lambda;
  double eta;
  size_t cg_iters;
  double ga_ratio;
} dngd_record;

/* ---- trainer handle -------------------------------------------------- */

typedef struct dngd_trainer dngd_trainer;

/* Builds a trainer from an experiment config (JSON text, same schema as the
   CLI) for one seed. The budget, seeds and output_dir fields are ignored. */
DNGD_API dngd_status dngd_trainer_create(const char* config_json, uint64_t seed,
                                         dngd_trainer** out);
DNGD_API void dngd_trainer_destroy(dngd_trainer* trainer);
/* Runs one iteration; `record` may be NULL. */
DNGD_API dngd_status dngd_trainer_step(dngd_trainer* trainer, dngd_record* record);
DNGD_API dngd_status dngd_trainer_num_params(const dngd_trainer* trainer, size_t* count);
DNGD_API dngd_status dngd_trainer_get_params(const dngd_trainer* trainer, double* params,
                                             size_t count);
DNGD_API dngd_status dngd_trainer_set_params(dngd_trainer* trainer, const double* params,
                                             size_t count);
/* Relative L2 error of the current parameters against the reference. */
DNGD_API dngd_status dngd_trainer_error(const dngd_trainer* trainer, double* rel_l2);

/* ---- experiment runner ----------------------------------------------- */

typedef struct {
  const char* output_dir; /* NULL keeps the config value */
  const uint64_t* seeds;  /* NULL keeps the config value */
  size_t num_seeds;
  int deterministic;   /* nonzero: single worker, virtual clock in the CSV */
  size_t max_threads;  /* 0: DNGD_THREADS, then the hardware */
} dngd_run_options;

typedef struct {
  uint64_t seed;
  size_t iterations;
  double final_loss;
  double final_rel_l2;
  int failed; /* aborted or diverged */
} dngd_seed_summary;

typedef void (*dngd_seed_callback)(const dngd_seed_summary* summary, void* user);

/* Reads the config at `config_path`, writes one CSV per seed plus
   summary.json. Nothing is written when the config is invalid. `on_seed`
   (optional) sees every seed after all have finished, in config order. */
DNGD_API dngd_status dngd_run_experiment(const char* config_path,
                                         const dngd_run_options* options,
                                         dngd_seed_callback on_seed, void* user);

typedef void (*dngd_sweep_callback)(size_t m, size_t n, double primal_s, double dual_s,
                                    const char* winner, void* user);

/* Reads a sweep config and writes sweep.csv; `on_cell` is optional. */
DNGD_API dngd_status dngd_run_sweep(const char* config_path, const char* output_dir,
                                    dngd_sweep_callback on_cell, void* user);

typedef void (*dngd_check_callback)(const char* name, int passed, const char* detail,
                                    void* user);

/* Runs the built-in oracle checks; `failed` receives the failure count. */
DNGD_API dngd_status dngd_run_checks(dngd_check_callback on_check, void* user, size_t* failed);

typedef void (*dngd_problem_callback)(const char* name, const char* description, void* user);

DNGD_API dngd_status dngd_list_problems(dngd_problem_callback on_problem, void* user);

#ifdef __cplusplus
}
#endif

#endif /* DNGD_H_ */
