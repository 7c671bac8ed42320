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

#include "dngd/ad/residual_model.hpp"
#include "dngd/collocation.hpp"
#include "dngd/solver/nystrom.hpp"
#include "dngd/solver/pcg.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <random>

namespace dngd::solver {

inline constexpr double kGaRatioLimit = 0.5;
inline constexpr double kVelocityFloor = 1e-12;
inline constexpr int kMaxLambdaBumps = 5;

struct StepResult {
  Vector delta;         // step handed to the line search
  Vector velocity;      // LM step v
  Vector acceleration;  // GA correction a; empty when GA is off
  double lambda_used = 0.0;
  std::size_t cg_iterations = 0;
  double eta = 1.0;
  std::optional<double> ga_ratio;  // 2||a|| / ||v||
  bool ga_applied = false;
  bool cg_breakdown = false;
  bool cg_converged = true;
};

// f_vv along a parameter direction.
using SecondAlong = std::function<Vector(const Vector&)>;

// Adds a/2 to v when ||v|| > 1e-12 and 2||a||/||v|| <= 0.5; otherwise delta = v.
void apply_acceleration(StepResult& step, Vector acceleration);

// Dense dual step from an explicit Jacobian and its Gramian. Factorizes
// K + lambda I once (bumping lambda by 10 on failure, at most 5 times),
// solves for y, recovers v = -(J^T y + g) / lambda and, when `second` is set,
// the GA correction a = -J^T (K + lambda I)^{-1} f_vv on the same factor. A few
// rounds of iterative refinement on the primal system, reusing the factor,
// recover the accuracy lost to cancellation when lambda is small.
StepResult dense_dual_step(const Matrix& J, const Matrix& K, const Vector& g, double lambda,
                           const SecondAlong& second = {});

// The same step for the loss gradient g = J^T r, computed as
// v = -J^T (K + lambda I)^{-1} r. Algebraically equal to the g form, it avoids
// the cancellation in J^T y + g, which costs accuracy when lambda is small.
// Falls back to the g form when m > n, where K is singular.
StepResult dense_dual_residual_step(const Matrix& J, const Matrix& K, const Vector& r,
                                    double lambda, const SecondAlong& second = {});

StepResult dense_dual_solve(const ad::ResidualModel& model, const Vector& theta, const Vector& g,
                            const CollocationSet& points, double lambda, bool use_ga);

// Step on the gradient of the loss at theta, in residual form.
StepResult dense_dual_solve(const ad::ResidualModel& model, const Vector& theta,
                            const CollocationSet& points, double lambda, bool use_ga);

struct PcgOptions {
  std::size_t landmarks = 100;  // 0 disables the Nystrom preconditioner
  double tol = 1e-10;
  std::size_t max_iters = 1000;
  NystromOptions nystrom{};
};

// Matrix-free dual step: (K + lambda I) y = -J g by Nystrom-preconditioned CG.
StepResult pcg_step(const ad::ResidualModel& model, const Vector& theta, const Vector& g,
                    const CollocationSet& points, double lambda, const PcgOptions& options,
                    bool use_ga, std::mt19937_64& rng);

// Residual form for the loss gradient: (K + lambda I) z = r, v = -J^T z;
// the g form when m > n.
StepResult pcg_step(const ad::ResidualModel& model, const Vector& theta,
                    const CollocationSet& points, double lambda, const PcgOptions& options,
                    bool use_ga, std::mt19937_64& rng);

// Generic dual step on an explicit Gramian operator, given b = -J g and the
// recovery map y -> J^T y. Used by tests that prescribe K directly.
StepResult pcg_dual_step(const GramianOperator& K, const Vector& b, const Vector& g,
                         const LinearMap& jt, double lambda, const PcgOptions& options,
                         std::mt19937_64& rng);

// Primal oracle: (J^T J + lambda I) dtheta = -g with J built column by column
// from forward passes on basis vectors.
Vector primal_gn_solve(const ad::ResidualModel& model, const Vector& theta, const Vector& g,
                       const CollocationSet& points, double lambda);

// Primal step from an explicit Jacobian, with the GA solve
// (J^T J + lambda I) a = -J^T f_vv when `second` is set.
StepResult primal_gn_step(const Matrix& J, const Vector& g, double lambda,
                          const SecondAlong& second = {});

StepResult primal_gn_step(const ad::ResidualModel& model, const Vector& theta, const Vector& g,
                          const CollocationSet& points, double lambda, bool use_ga);

}  // namespace dngd::solver
