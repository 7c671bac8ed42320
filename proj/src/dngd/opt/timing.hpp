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

#include "dngd/collocation.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dngd::opt {

struct SweepOptions {
  std::vector<std::size_t> ms{30, 300, 3000};
  std::vector<std::size_t> ns{30, 300, 3000};
  std::size_t iterations = 3;
  std::uint64_t seed = 0;
  double lambda_cap = 1e-5;
  std::size_t line_search_points = 31;

  void validate() const;
  bool operator==(const SweepOptions&) const = default;
};

// Mean seconds per iteration of each solver on one (m, n) cell.
struct SweepCell {
  std::size_t m = 0;
  std::size_t n = 0;
  double primal_s = 0.0;
  double dual_s = 0.0;

  // "dual" exactly when dual_s < primal_s.
  std::string winner() const { return dual_s < primal_s ? "dual" : "primal"; }
};

// Trains the synthetic tanh map of each cell for a fixed number of iterations
// with the primal and with the dense dual solver, both fed the same explicit
// Jacobian, and records the mean wall time per iteration. Cells are ordered
// m-major.
std::vector<SweepCell> timing_sweep(const SweepOptions& options);

// Times one cell; exposed for tests.
SweepCell time_cell(std::size_t m, std::size_t n, const SweepOptions& options);

}  // namespace dngd::opt
