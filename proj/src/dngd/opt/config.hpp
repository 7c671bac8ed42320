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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace dngd::opt {

// Stopping rule of a training run; exactly one kind is active.
struct Budget {
  enum class Kind { iterations, wall_seconds };
  Kind kind = Kind::iterations;
  std::size_t max_iters = 100;
  double wall_seconds = 0.0;

  static Budget iterations(std::size_t n) { return {Kind::iterations, n, 0.0}; }
  static Budget seconds(double s) { return {Kind::wall_seconds, 0, s}; }

  bool operator==(const Budget&) const = default;
};

struct OptimizerConfig {
  double lambda_cap = 1e-5;
  std::size_t dense_threshold = 4000;  // dense solve when m < threshold
  std::size_t nystrom_rank = 100;
  bool stratified_landmarks = false;
  double cg_tol = 1e-10;
  std::size_t cg_max_iters = 500;
  bool use_ga = false;
  std::size_t line_search_points = 31;
  Budget budget{};
  bool resample = true;
  // Skip the update when the best line-search loss exceeds the current one.
  bool reject_if_worse = false;
  // Relative L2 error is evaluated every `eval_every` iterations and at the end.
  std::size_t eval_every = 1;

  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

enum class BaselineMethod { adam, sgd_momentum };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double momentum = 0.9;  // Nesterov
  Budget budget{};
  bool resample = true;
  std::size_t eval_every = 1;
  double divergence_loss = 1e10;

  void validate() const;
  bool operator==(const BaselineConfig&) const = default;
};

inline constexpr double kLambdaFloor = 1e-12;
inline constexpr std::size_t kMaxConsecutiveRejections = 10;

struct IterationRecord {
  std::size_t iteration = 0;
  double wall_time = 0.0;
  double loss = 0.0;
  double rel_l2 = std::numeric_limits<double>::quiet_NaN();  // NaN when not evaluated
  double lambda = 0.0;
  double eta = 0.0;
  std::size_t cg_iterations = 0;
  double ga_ratio = std::numeric_limits<double>::quiet_NaN();  // NaN when absent
  bool degraded = false;  // line-search minimum above the previous loss
};

struct TrainTrace {
  std::vector<IterationRecord> records;
  bool aborted = false;
  bool diverged = false;
  std::string error;  // diagnostic when aborted

  double final_loss() const;
  double final_rel_l2() const;  // last evaluated error, NaN if none
};

}  // namespace dngd::opt
