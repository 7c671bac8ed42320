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

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dngd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ClassKind { interior, boundary, initial };

const char* to_string(ClassKind kind) noexcept;

// One residual class: N points of a given spatial dimension, each producing
// output_dim scalar residuals, all scaled by `weight` (1/sqrt(N) by default).
struct CollocationClass {
  ClassKind kind = ClassKind::interior;
  std::size_t dim = 0;
  std::size_t output_dim = 1;
  double weight = 1.0;
  std::vector<double> coords;  // row-major N x dim
  // Optional per-point integer payload (e.g. STDE coordinate subsets).
  std::size_t aux_stride = 0;
  std::vector<std::uint32_t> aux;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  std::span<const std::uint32_t> aux_of(std::size_t i) const {
    if (aux_stride == 0) return {};
    return {aux.data() + i * aux_stride, aux_stride};
  }
  std::size_t num_residuals() const { return size() * output_dim; }
};

struct CollocationSet {
  std::vector<CollocationClass> classes;

  std::size_t num_residuals() const;
  std::size_t num_points() const;
  // offsets[c] is the first residual row of class c; offsets.back() == m.
  std::vector<std::size_t> offsets() const;
};

// A collocation point as seen by a residual map.
struct PointRef {
  std::size_t class_index = 0;
  ClassKind kind = ClassKind::interior;
  std::size_t index = 0;
  std::span<const double> x;
  std::span<const std::uint32_t> aux;
};

PointRef point_ref(const CollocationSet& set, std::size_t class_index, std::size_t point_index);

// Stacked residual vector with its class partition.
struct ResidualBatch {
  Vector values;
  std::vector<std::size_t> offsets;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double loss() const { return 0.5 * values.squaredNorm(); }
};

ResidualBatch make_batch(const CollocationSet& set, Vector values);

// Maps a flat residual row to (class, point, output component).
struct ResidualLocation {
  std::size_t class_index;
  std::size_t point_index;
  std::size_t component;
};
ResidualLocation locate_residual(const CollocationSet& set, std::size_t row);

}  // namespace dngd
