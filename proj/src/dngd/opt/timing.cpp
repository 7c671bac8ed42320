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


#include "dngd/opt/timing.hpp"

#include "dngd/ad/derivatives.hpp"
#include "dngd/error.hpp"
#include "dngd/opt/dngd.hpp"
#include "dngd/opt/training_problem.hpp"
#include "dngd/solver/dual_solve.hpp"
#include "dngd/solver/gramian.hpp"

#include <algorithm>
#include <chrono>

namespace dngd::opt {

namespace {

enum class Route { primal, dual };

struct RouteState {
  Route route;
  Vector theta;
  double seconds = 0.0;
};

void iterate(const TanhResidualMap& map, const CollocationSet& points, RouteState& state,
             const SweepOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto loss_fn = [&](const Vector& t) {
    return ad::evaluate_residuals(map, t, points).loss();
  };
  const auto start = Clock::now();
  auto rj = ad::residual_and_jacobian(map, state.theta, points);
  const Vector g = rj.jacobian.transpose() * rj.residual;
  const double lambda = lm_damping(0.5 * rj.residual.squaredNorm(), options.lambda_cap);
  const solver::StepResult step =
      state.route == Route::primal
          ? solver::primal_gn_step(rj.jacobian, g, lambda)
          : solver::dense_dual_step(rj.jacobian, solver::gramian_from_jacobian(rj.jacobian), g,
                                    lambda);
  const LineSearchResult ls =
      line_search(loss_fn, state.theta, step.delta, options.line_search_points);
  if (!ls.all_nonfinite) state.theta += ls.eta * step.delta;
  state.seconds += std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void SweepOptions::validate() const {
  require(!ms.empty() && !ns.empty(), ErrorCode::config, "sweep grid must not be empty");
  for (std::size_t m : ms) require(m >= 1, ErrorCode::config, "sweep m must be positive");
  for (std::size_t n : ns) require(n >= 1, ErrorCode::config, "sweep n must be positive");
  require(iterations >= 1, ErrorCode::config, "sweep iterations must be positive");
  require(lambda_cap > 0.0, ErrorCode::config, "lambda_cap must be positive");
  require(line_search_points >= 1, ErrorCode::config, "line_search_points must be at least 1");
  for (std::size_t m : ms)
    for (std::size_t n : ns) {
      // J (m x n) plus the larger of the two Gramians.
      const std::size_t side = std::max(m, n);
      const std::size_t bytes = 8 * (m * n + side * side);
      require(bytes <= solver::kDefaultMemoryBudget, ErrorCode::memory_budget,
              "sweep cell m = " + std::to_string(m) + ", n = " + std::to_string(n) +
                  " exceeds the memory budget");
    }
}

SweepCell time_cell(std::size_t m, std::size_t n, const SweepOptions& options) {
  const TanhResidualMap map = TanhResidualMap::random(m, n, derive_seed(options.seed, m, n));
  const CollocationSet points = index_points(m);
  const Vector theta0 = Vector::Zero(static_cast<Eigen::Index>(n));
  SweepCell cell;
  cell.m = m;
  cell.n = n;
  // The routes alternate iteration by iteration so that machine load drifts
  // affect both alike.
  RouteState primal{Route::primal, theta0};
  RouteState dual{Route::dual, theta0};
  for (std::size_t k = 0; k < options.iterations; ++k) {
    iterate(map, points, primal, options);
    iterate(map, points, dual, options);
  }
  const double count = static_cast<double>(options.iterations);
  cell.primal_s = primal.seconds / count;
  cell.dual_s = dual.seconds / count;
  return cell;
}

std::vector<SweepCell> timing_sweep(const SweepOptions& options) {
  options.validate();
  std::vector<SweepCell> cells;
  cells.reserve(options.ms.size() * options.ns.size());
  for (std::size_t m : options.ms)
    for (std::size_t n : options.ns) cells.push_back(time_cell(m, n, options));
  return cells;
}

}  // namespace dngd::opt
