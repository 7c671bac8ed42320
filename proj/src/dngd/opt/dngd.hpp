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

#pragma once

#include "dngd/opt/config.hpp"
#include "dngd/opt/training_problem.hpp"
#include "dngd/solver/dual_solve.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>

namespace dngd::opt {

// max(min(loss, cap), 1e-12).
double lm_damping(double loss, double lambda_cap);

struct LineSearchResult {
  double eta = 0.0;
  double loss = 0.0;
  std::size_t evaluations = 0;
  bool all_nonfinite = false;
};

// Minimizes loss(theta + eta * delta) over eta = 2^-j, j = 0..points-1; ties
// go to the larger eta. Non-finite losses never win.
LineSearchResult line_search(const std::function<double(const Vector&)>& loss,
                             const Vector& theta, const Vector& delta,
                             std::size_t points = 31);

// One optimizer over one training problem, advanced an iteration at a time.
class Trainer {
 public:
  virtual ~Trainer() = default;
  // Performs one iteration and returns its record; throws dngd::Error when
  // the run has to stop.
  virtual IterationRecord step() = 0;
  virtual const Vector& params() const = 0;
  virtual void set_params(const Vector& theta) = 0;
  virtual std::size_t iteration() const = 0;
  // Error metric on the current parameters (NaN without a reference).
  virtual double evaluate_error() const = 0;
};

class DngdTrainer final : public Trainer {
 public:
  DngdTrainer(const TrainingProblem& problem, OptimizerConfig config, std::uint64_t seed,
              std::optional<Vector> theta0 = std::nullopt);

  IterationRecord step() override;
  const Vector& params() const override { return theta_; }
  void set_params(const Vector& theta) override;
  std::size_t iteration() const override { return iteration_; }
  double evaluate_error() const override;

  // Step of the most recent iteration.
  const solver::StepResult& last_step() const { return last_step_; }

 private:
  const TrainingProblem& problem_;
  OptimizerConfig config_;
  std::uint64_t seed_;
  Vector theta_;
  std::size_t iteration_ = 0;
  std::mt19937_64 landmark_rng_;
  CollocationSet fixed_points_;
  solver::StepResult last_step_;
  double elapsed_ = 0.0;  // seconds spent inside step()
};

class BaselineTrainer final : public Trainer {
 public:
  BaselineTrainer(const TrainingProblem& problem, BaselineConfig config, std::uint64_t seed,
                  std::optional<Vector> theta0 = std::nullopt);

  IterationRecord step() override;
  const Vector& params() const override { return theta_; }
  void set_params(const Vector& theta) override;
  std::size_t iteration() const override { return iteration_; }
  double evaluate_error() const override;

 private:
  const TrainingProblem& problem_;
  BaselineConfig config_;
  std::uint64_t seed_;
  Vector theta_;
  Vector m1_, m2_;  // Adam moments or the momentum buffer
  std::size_t iteration_ = 0;
  CollocationSet fixed_points_;
  double elapsed_ = 0.0;
};

// Drives a trainer until the budget is spent. Errors raised by a step end the
// run with `aborted` set and the records so far kept. `on_record` sees every
// record as it is produced.
TrainTrace run_trainer(Trainer& trainer, const Budget& budget, std::size_t eval_every,
                       const std::function<void(const IterationRecord&)>& on_record = {},
                       double divergence_loss = std::numeric_limits<double>::infinity());

TrainTrace dngd_run(const TrainingProblem& problem, const OptimizerConfig& config,
                    std::uint64_t seed, std::optional<Vector> theta0 = std::nullopt);

TrainTrace baseline_run(const TrainingProblem& problem, const BaselineConfig& config,
                        std::uint64_t seed, std::optional<Vector> theta0 = std::nullopt);

}  // namespace dngd::opt
