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

#include "dngd/exp/config.hpp"
#include "dngd/opt/config.hpp"
#include "dngd/opt/timing.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dngd::exp {

// Column order of every trace CSV.
inline constexpr const char* kTraceHeader =
    "iteration,wall_time_s,loss,rel_l2,lambda,eta,cg_iters,ga_ratio";
inline constexpr const char* kSweepHeader = "m,n,primal_s,dual_s,winner";

// Shortest text that parses back to the same double; empty for NaN.
std::string format_double(double x);

// One CSV row without the line break. Baseline rows leave lambda and
// ga_ratio empty; rel_l2 is empty on iterations without an evaluation.
std::string trace_row(const opt::IterationRecord& rec, bool has_lambda);

struct RunOptions {
  std::optional<std::string> output_dir;            // overrides the config
  std::optional<std::vector<std::uint64_t>> seeds;  // overrides the config
  // Single worker; the CSV time column holds a virtual clock (the iteration
  // count) and measured times go to seed_<s>.timing.csv.
  bool deterministic = false;
  // Upper bound on concurrent seeds; 0 reads DNGD_THREADS, then the hardware.
  std::size_t max_threads = 0;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::string csv_path;
  std::size_t iterations = 0;
  double final_loss = 0.0;
  double final_rel_l2 = 0.0;
  bool aborted = false;
  bool diverged = false;
  std::string error;
};

// Interpolated quartiles (linear between order statistics) of the finite
// entries; all NaN when there are none.
struct Quartiles {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr = 0.0;
  std::size_t count = 0;
};
Quartiles quartiles(std::vector<double> values);

struct ExperimentResult {
  std::vector<SeedOutcome> seeds;  // in config order
  Quartiles final_rel_l2;
  Quartiles final_loss;
  std::string summary_path;
};

// Writes <out>/seed_<s>.csv for each seed and <out>/summary.json. The config
// is validated before anything touches the disk.
ExperimentResult run_experiment(ExperimentConfig config, const RunOptions& options = {});

// Writes <out>/sweep.csv and returns its cells.
std::vector<opt::SweepCell> run_sweep(const SweepConfig& config,
                                      const std::optional<std::string>& output_dir = {});

// Worker count for `jobs` independent tasks under the options above.
std::size_t worker_count(const RunOptions& options, std::size_t jobs);

}  // namespace dngd::exp
