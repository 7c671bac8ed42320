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

#include "dngd/solver/gramian.hpp"

#include "dngd/ad/derivatives.hpp"
#include "dngd/error.hpp"

#include <string>

namespace dngd::solver {

std::size_t gramian_bytes(std::size_t m, std::size_t n) {
  return sizeof(double) * (m * m + m * n);
}

Matrix kernel_entry(const ad::ResidualModel& model, const Vector& theta,
                    const CollocationSet& points, std::size_t class_i, std::size_t point_i,
                    std::size_t class_j, std::size_t point_j) {
  require(class_i < points.classes.size() && class_j < points.classes.size(),
          ErrorCode::invalid_argument, "kernel_entry: class index out of range");
  require(point_i < points.classes[class_i].size() && point_j < points.classes[class_j].size(),
          ErrorCode::invalid_argument, "kernel_entry: point index out of range");
  // Rows of J_j are the VJPs of x_j seeded with e_k.
  const Matrix rows_j = ad::jacobian_rows_at(model, theta, points, class_j, point_j);
  const auto d_i = static_cast<Eigen::Index>(points.classes[class_i].output_dim);
  Matrix block(d_i, rows_j.rows());
  for (Eigen::Index k = 0; k < rows_j.rows(); ++k) {
    const Vector w = rows_j.row(k).transpose();
    block.col(k) = ad::jvp_at(model, theta, w, points, class_i, point_i);
  }
  return block;
}

Matrix gramian_from_jacobian(const Matrix& J) {
  Matrix K = Matrix::Zero(J.rows(), J.rows());
  K.selfadjointView<Eigen::Lower>().rankUpdate(J);
  K.triangularView<Eigen::StrictlyUpper>() = K.transpose();
  return K;
}

GramianMatrix assemble_gramian(const ad::ResidualModel& model, const Vector& theta,
                               const CollocationSet& points, std::size_t memory_budget) {
  const std::size_t m = points.num_residuals();
  const std::size_t n = model.num_params();
  const std::size_t bytes = gramian_bytes(m, n);
  if (bytes > memory_budget)
    throw Error(ErrorCode::memory_budget,
                "dense Gramian for m = " + std::to_string(m) + ", n = " + std::to_string(n) +
                    " needs " + std::to_string(bytes >> 20) + " MiB, budget is " +
                    std::to_string(memory_budget >> 20) + " MiB");
  GramianMatrix g;
  g.K = gramian_from_jacobian(ad::residual_and_jacobian(model, theta, points).jacobian);
  g.offsets = points.offsets();
  return g;
}

GramianMatrix assemble_gramian_entrywise(const ad::ResidualModel& model, const Vector& theta,
                                         const CollocationSet& points) {
  const auto m = static_cast<Eigen::Index>(points.num_residuals());
  GramianMatrix g{Matrix::Zero(m, m), points.offsets()};
  std::vector<std::pair<std::size_t, std::size_t>> index;
  std::vector<std::size_t> first_row;
  std::size_t row = 0;
  for (std::size_t c = 0; c < points.classes.size(); ++c) {
    for (std::size_t i = 0; i < points.classes[c].size(); ++i) {
      index.emplace_back(c, i);
      first_row.push_back(row);
      row += points.classes[c].output_dim;
    }
  }
  for (std::size_t a = 0; a < index.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const Matrix block = kernel_entry(model, theta, points, index[a].first, index[a].second,
                                        index[b].first, index[b].second);
      const auto ra = static_cast<Eigen::Index>(first_row[a]);
      const auto rb = static_cast<Eigen::Index>(first_row[b]);
      g.K.block(ra, rb, block.rows(), block.cols()) = block;
      if (a != b) g.K.block(rb, ra, block.cols(), block.rows()) = block.transpose();
    }
  }
  return g;
}

ExplicitGramian::ExplicitGramian(Matrix K) : K_(std::move(K)) {
  require(K_.rows() == K_.cols(), ErrorCode::dimension_mismatch, "Gramian must be square");
}

Vector ExplicitGramian::apply(const Vector& v) const {
  require(v.size() == K_.rows(), ErrorCode::dimension_mismatch,
          "vector length does not match the Gramian");
  return K_ * v;
}

Matrix ExplicitGramian::columns(std::span<const std::size_t> idx) const {
  Matrix C(K_.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] < size(), ErrorCode::invalid_argument, "column index out of range");
    C.col(static_cast<Eigen::Index>(k)) = K_.col(static_cast<Eigen::Index>(idx[k]));
  }
  return C;
}

ResidualGramian::ResidualGramian(const ad::ResidualModel& model, const Vector& theta,
                                 const CollocationSet& points)
    : model_(model), theta_(theta), points_(points), m_(points.num_residuals()) {}

Vector ResidualGramian::apply(const Vector& v) const {
  require(static_cast<std::size_t>(v.size()) == m_, ErrorCode::dimension_mismatch,
          "vector length does not match the number of residuals");
  const Vector w = ad::vjp_params(model_, theta_, v, points_);
  return ad::jvp_params(model_, theta_, w, points_).values;
}

Matrix ResidualGramian::columns(std::span<const std::size_t> idx) const {
  Matrix C(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] < m_, ErrorCode::invalid_argument, "column index out of range");
    const auto loc = locate_residual(points_, idx[k]);
    const Matrix rows =
        ad::jacobian_rows_at(model_, theta_, points_, loc.class_index, loc.point_index);
    const Vector w = rows.row(static_cast<Eigen::Index>(loc.component)).transpose();
    C.col(static_cast<Eigen::Index>(k)) = ad::jvp_params(model_, theta_, w, points_).values;
  }
  return C;
}

ResidualBatch kvp(const ad::ResidualModel& model, const Vector& theta, const Vector& v,
                  double lambda, const CollocationSet& points) {
  require(static_cast<std::size_t>(v.size()) == points.num_residuals(),
          ErrorCode::dimension_mismatch, "kvp: vector length does not match m");
  const Vector w = ad::vjp_params(model, theta, v, points);
  ResidualBatch out = ad::jvp_params(model, theta, w, points);
  out.values += lambda * v;
  return out;
}

}  // namespace dngd::solver
