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

#include <cstddef>
#include <span>
#include <vector>

namespace dngd::solver {

// Residual Gramian K = J J^T with the class partition of its rows.
struct GramianMatrix {
  Matrix K;
  std::vector<std::size_t> offsets;

  std::size_t size() const { return static_cast<std::size_t>(K.rows()); }
};

// Default cap on the dense working set (K plus the transient Jacobian).
inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{3} << 30;

// Bytes needed to assemble K densely for m residuals and n parameters.
std::size_t gramian_bytes(std::size_t m, std::size_t n);

// Block J_i J_j^T (d_i x d_j): VJP at x_j seeded with each unit vector, then a
// JVP at x_i along the resulting parameter vector.
Matrix kernel_entry(const ad::ResidualModel& model, const Vector& theta,
                    const CollocationSet& points, std::size_t class_i, std::size_t point_i,
                    std::size_t class_j, std::size_t point_j);

// Dense K. Each point contributes its Jacobian rows from one reverse sweep per
// output; only the lower triangle of K is formed and the upper one is mirrored.
// Throws ErrorCode::memory_budget before allocating if the budget is exceeded.
GramianMatrix assemble_gramian(const ad::ResidualModel& model, const Vector& theta,
                               const CollocationSet& points,
                               std::size_t memory_budget = kDefaultMemoryBudget);

// Same matrix built block by block from kernel_entry, skipping j > i and
// filling those blocks by symmetry. Quadratic in m AD passes; for checks.
GramianMatrix assemble_gramian_entrywise(const ad::ResidualModel& model, const Vector& theta,
                                         const CollocationSet& points);

// K from an explicit Jacobian, lower triangle by a rank update then mirrored.
Matrix gramian_from_jacobian(const Matrix& J);

// Access to K for iterative solvers and the Nystrom construction.
class GramianOperator {
 public:
  virtual ~GramianOperator() = default;
  virtual std::size_t size() const = 0;
  // K v.
  virtual Vector apply(const Vector& v) const = 0;
  // K(:, idx), m x |idx|.
  virtual Matrix columns(std::span<const std::size_t> idx) const = 0;
};

class ExplicitGramian final : public GramianOperator {
 public:
  explicit ExplicitGramian(Matrix K);
  std::size_t size() const override { return static_cast<std::size_t>(K_.rows()); }
  Vector apply(const Vector& v) const override;
  Matrix columns(std::span<const std::size_t> idx) const override;
  const Matrix& matrix() const { return K_; }

 private:
  Matrix K_;
};

// Matrix-free K at a fixed theta and collocation set.
class ResidualGramian final : public GramianOperator {
 public:
  ResidualGramian(const ad::ResidualModel& model, const Vector& theta,
                  const CollocationSet& points);
  std::size_t size() const override { return m_; }
  // J (J^T v): one reverse pass then one forward pass.
  Vector apply(const Vector& v) const override;
  // Column k of K is J (J_k^T): the k-th Jacobian row from a reverse sweep,
  // pushed forward through every point.
  Matrix columns(std::span<const std::size_t> idx) const override;

 private:
  const ad::ResidualModel& model_;
  const Vector& theta_;
  const CollocationSet& points_;
  std::size_t m_;
};

// (K + lambda I) v via vjp, jvp and the shift.
ResidualBatch kvp(const ad::ResidualModel& model, const Vector& theta, const Vector& v,
                  double lambda, const CollocationSet& points);

}  // namespace dngd::solver
