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
#include "dngd/opt/timing.hpp"
#include "dngd/pde/problem.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dngd::exp {

enum class Method { dngd, adam, sgd_momentum };

const char* to_string(Method m) noexcept;

// One experiment: a problem, a network, an optimizer, a budget and seeds.
// The budget lives here and is copied into the optimizer settings. Equality
// covers what the JSON form carries: the settings of the selected method only,
// and only the active budget kind.
struct ExperimentConfig {
  std::string name = "experiment";
  pde::ProblemOptions problem{};
  std::vector<std::size_t> counts;  // empty selects the problem defaults
  std::size_t eval_points = 10000;
  std::vector<std::size_t> layers{2, 32, 32, 1};
  Method method = Method::dngd;
  opt::OptimizerConfig dngd{};
  opt::BaselineConfig baseline{};
  opt::Budget budget{};
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "out";

  // Throws ErrorCode::config naming the offending field.
  void validate() const;
  opt::OptimizerConfig optimizer_config() const;
  opt::BaselineConfig baseline_config() const;

  bool operator==(const ExperimentConfig& other) const;
};

struct SweepConfig {
  opt::SweepOptions options{};
  std::string output_dir = "out";

  void validate() const;
  bool operator==(const SweepConfig&) const = default;
};

// Parsing is strict: unknown keys, wrong types and invalid values all raise
// ErrorCode::config with a "line L, column C: /json/path: message" text.
// `source` names the input in diagnostics.
ExperimentConfig parse_experiment(const std::string& text, const std::string& source = "config");
SweepConfig parse_sweep(const std::string& text, const std::string& source = "config");
ExperimentConfig load_experiment(const std::string& path);
SweepConfig load_sweep(const std::string& path);

// Pretty-printed JSON that parses back to an equal config.
std::string to_json(const ExperimentConfig& config);
std::string to_json(const SweepConfig& config);

}  // namespace dngd::exp
