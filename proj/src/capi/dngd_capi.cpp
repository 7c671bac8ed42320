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


#include "dngd.h"

#include "dngd/error.hpp"
#include "dngd/exp/checks.hpp"
#include "dngd/exp/config.hpp"
#include "dngd/exp/run.hpp"
#include "dngd/opt/dngd.hpp"
#include "dngd/opt/training_problem.hpp"

#include <limits>
#include <memory>
#include <new>
#include <string>

struct dngd_trainer {
  std::unique_ptr<dngd::opt::PdeTrainingProblem> problem;
  std::unique_ptr<dngd::opt::Trainer> trainer;
  bool has_lambda = true;
};

namespace {

thread_local std::string last_error;

dngd_status status_of(dngd::ErrorCode code) {
  using dngd::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument:
      return DNGD_INVALID_ARGUMENT;
    case ErrorCode::dimension_mismatch:
      return DNGD_DIMENSION_MISMATCH;
    case ErrorCode::non_finite:
      return DNGD_NON_FINITE;
    case ErrorCode::numerical_failure:
      return DNGD_NUMERICAL_FAILURE;
    case ErrorCode::memory_budget:
      return DNGD_MEMORY_BUDGET;
    case ErrorCode::config:
      return DNGD_CONFIG_ERROR;
    case ErrorCode::io:
      return DNGD_IO_ERROR;
  }
  return DNGD_INTERNAL_ERROR;
}

dngd_status fail(dngd_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body` with every exception turned into a status.
template <class F>
dngd_status guarded(F&& body) noexcept {
  try {
    last_error.clear();
    return body();
  } catch (const dngd::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DNGD_MEMORY_BUDGET, "out of memory");
  } catch (const std::exception& e) {
    return fail(DNGD_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(DNGD_INTERNAL_ERROR, "unknown error");
  }
}

#define DNGD_REQUIRE_ARG(cond, what) \
  if (!(cond)) return fail(DNGD_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* dngd_version(void) { return "1.0.0"; }

const char* dngd_status_string(dngd_status status) {
  switch (status) {
    case DNGD_OK:
      return "ok";
    case DNGD_INVALID_ARGUMENT:
      return "invalid argument";
    case DNGD_DIMENSION_MISMATCH:
      return "dimension mismatch";
    case DNGD_NON_FINITE:
      return "non-finite value";
    case DNGD_NUMERICAL_FAILURE:
      return "numerical failure";
    case DNGD_MEMORY_BUDGET:
      return "memory budget exceeded";
    case DNGD_CONFIG_ERROR:
      return "configuration error";
    case DNGD_IO_ERROR:
      return "i/o error";
    case DNGD_INTERNAL_ERROR:
      return "internal error";
  }
  return "unknown status";
}

const char* dngd_last_error(void) { return last_error.c_str(); }

dngd_status dngd_trainer_create(const char* config_json, uint64_t seed, dngd_trainer** out) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(config_json != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const auto config = dngd::exp::parse_experiment(config_json, "config");
    auto handle = std::make_unique<dngd_trainer>();
    handle->problem = std::make_unique<dngd::opt::PdeTrainingProblem>(
        dngd::pde::make_problem(config.problem), config.layers, config.counts,
        config.eval_points);
    if (config.method == dngd::exp::Method::dngd) {
      handle->trainer = std::make_unique<dngd::opt::DngdTrainer>(
          *handle->problem, config.optimizer_config(), seed);
    } else {
      handle->trainer = std::make_unique<dngd::opt::BaselineTrainer>(
          *handle->problem, config.baseline_config(), seed);
      handle->has_lambda = false;
    }
    *out = handle.release();
    return DNGD_OK;
  });
}

void dngd_trainer_destroy(dngd_trainer* trainer) { delete trainer; }

dngd_status dngd_trainer_step(dngd_trainer* trainer, dngd_record* record) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(trainer != nullptr, "null trainer");
    const auto rec = trainer->trainer->step();
    if (record != nullptr) {
      record->iteration = rec.iteration;
      record->wall_time_s = rec.wall_time;
      record->loss = rec.loss;
      record->rel_l2 = rec.rel_l2;
      record->lambda =
          trainer->has_lambda ? rec.lambda : std::numeric_limits<double>::quiet_NaN();
      record->eta = rec.eta;
      record->cg_iters = rec.cg_iterations;
      record->ga_ratio = rec.ga_ratio;
    }
    return DNGD_OK;
  });
}

dngd_status dngd_trainer_num_params(const dngd_trainer* trainer, size_t* count) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(trainer != nullptr && count != nullptr, "null argument");
    *count = static_cast<size_t>(trainer->trainer->params().size());
    return DNGD_OK;
  });
}

dngd_status dngd_trainer_get_params(const dngd_trainer* trainer, double* params, size_t count) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(trainer != nullptr && params != nullptr, "null argument");
    const auto& theta = trainer->trainer->params();
    if (count != static_cast<size_t>(theta.size()))
      return fail(DNGD_DIMENSION_MISMATCH, "expected " + std::to_string(theta.size()) +
                                               " parameters, got " + std::to_string(count));
    std::copy(theta.data(), theta.data() + theta.size(), params);
    return DNGD_OK;
  });
}

dngd_status dngd_trainer_set_params(dngd_trainer* trainer, const double* params, size_t count) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(trainer != nullptr && params != nullptr, "null argument");
    const auto n = static_cast<size_t>(trainer->trainer->params().size());
    if (count != n)
      return fail(DNGD_DIMENSION_MISMATCH,
                  "expected " + std::to_string(n) + " parameters, got " + std::to_string(count));
    dngd::Vector theta = Eigen::Map<const dngd::Vector>(params, static_cast<Eigen::Index>(n));
    if (!theta.allFinite()) return fail(DNGD_NON_FINITE, "parameters are not finite");
    trainer->trainer->set_params(theta);
    return DNGD_OK;
  });
}

dngd_status dngd_trainer_error(const dngd_trainer* trainer, double* rel_l2) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(trainer != nullptr && rel_l2 != nullptr, "null argument");
    *rel_l2 = trainer->trainer->evaluate_error();
    return DNGD_OK;
  });
}

dngd_status dngd_run_experiment(const char* config_path, const dngd_run_options* options,
                                dngd_seed_callback on_seed, void* user) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(config_path != nullptr, "null config path");
    dngd::exp::RunOptions run;
    if (options != nullptr) {
      if (options->output_dir != nullptr) run.output_dir = options->output_dir;
      if (options->seeds != nullptr)
        run.seeds = std::vector<std::uint64_t>(options->seeds, options->seeds + options->num_seeds);
      run.deterministic = options->deterministic != 0;
      run.max_threads = options->max_threads;
    }
    const auto config = dngd::exp::load_experiment(config_path);
    const auto result = dngd::exp::run_experiment(config, run);
    if (on_seed != nullptr)
      for (const auto& s : result.seeds) {
        const dngd_seed_summary summary{s.seed, s.iterations, s.final_loss, s.final_rel_l2,
                                        s.aborted || s.diverged ? 1 : 0};
        on_seed(&summary, user);
      }
    return DNGD_OK;
  });
}

dngd_status dngd_run_sweep(const char* config_path, const char* output_dir,
                           dngd_sweep_callback on_cell, void* user) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(config_path != nullptr, "null config path");
    const auto config = dngd::exp::load_sweep(config_path);
    std::optional<std::string> out;
    if (output_dir != nullptr) out = output_dir;
    const auto cells = dngd::exp::run_sweep(config, out);
    if (on_cell != nullptr)
      for (const auto& c : cells) on_cell(c.m, c.n, c.primal_s, c.dual_s, c.winner().c_str(), user);
    return DNGD_OK;
  });
}

dngd_status dngd_run_checks(dngd_check_callback on_check, void* user, size_t* failed) {
  return guarded([&] {
    size_t failures = 0;
    dngd::exp::run_checks([&](const dngd::exp::CheckResult& r) {
      failures += r.passed ? 0 : 1;
      if (on_check != nullptr) on_check(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), user);
    });
    if (failed != nullptr) *failed = failures;
    return DNGD_OK;
  });
}

dngd_status dngd_list_problems(dngd_problem_callback on_problem, void* user) {
  return guarded([&] {
    DNGD_REQUIRE_ARG(on_problem != nullptr, "null callback");
    for (const auto& p : dngd::pde::list_problems())
      on_problem(p.name.c_str(), p.description.c_str(), user);
    return DNGD_OK;
  });
}

}  // extern "C"
