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
#include "dngd/solver/gramian.hpp"

#include <cstddef>
#include <random>
#include <vector>

namespace dngd::solver {

// Low-rank spectral approximation K ~ U diag(eigenvalues) U^T, applied as
//   P^{-1} v = U (Lambda + lambda I)^{-1} U^T v + (v - U U^T v) / lambda.
struct NystromPreconditioner {
  Matrix U;            // m x r, orthonormal columns
  Vector eigenvalues;  // r, nonnegative, descending
  double lambda = 1.0;
  std::vector<std::size_t> landmarks;

  std::size_t rank() const { return static_cast<std::size_t>(U.cols()); }
};

struct NystromOptions {
  // Eigenpairs of K_II below this fraction of the largest one are dropped.
  double relative_threshold = 1e-10;
  // Draw landmarks per residual class in proportion to the class size.
  bool stratified = false;
};

// `landmarks` residual indices drawn uniformly without replacement.
std::vector<std::size_t> choose_landmarks(std::size_t m, std::size_t count, std::mt19937_64& rng);
std::vector<std::size_t> choose_landmarks_stratified(std::span<const std::size_t> offsets,
                                                     std::size_t count, std::mt19937_64& rng);

// Builds the preconditioner from an explicit landmark set.
NystromPreconditioner nystrom_from_landmarks(const GramianOperator& K,
                                             std::vector<std::size_t> landmarks, double lambda,
                                             const NystromOptions& options = {});

NystromPreconditioner nystrom_build(const GramianOperator& K, std::size_t num_landmarks,
                                    double lambda, std::mt19937_64& rng,
                                    const NystromOptions& options = {});

// Residual-map form; the class partition of `points` drives stratified draws.
NystromPreconditioner nystrom_build(const ad::ResidualModel& model, const Vector& theta,
                                    const CollocationSet& points, std::size_t num_landmarks,
                                    double lambda, std::mt19937_64& rng,
                                    const NystromOptions& options = {});

Vector precond_apply(const NystromPreconditioner& P, const Vector& v);

}  // namespace dngd::solver
