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

#include "dngd/collocation.hpp"

#include "dngd/error.hpp"

namespace dngd {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::non_finite: return "non-finite value";
    case ErrorCode::numerical_failure: return "numerical failure";
    case ErrorCode::memory_budget: return "memory budget exceeded";
    case ErrorCode::config: return "invalid configuration";
    case ErrorCode::io: return "i/o failure";
  }
  return "unknown";
}

const char* to_string(ClassKind kind) noexcept {
  switch (kind) {
    case ClassKind::interior: return "interior";
    case ClassKind::boundary: return "boundary";
    case ClassKind::initial: return "initial";
  }
  return "unknown";
}

std::size_t CollocationSet::num_residuals() const {
  std::size_t m = 0;
  for (const auto& c : classes) m += c.num_residuals();
  return m;
}

std::size_t CollocationSet::num_points() const {
  std::size_t count = 0;
  for (const auto& c : classes) count += c.size();
  return count;
}

std::vector<std::size_t> CollocationSet::offsets() const {
  std::vector<std::size_t> out;
  out.reserve(classes.size() + 1);
  std::size_t running = 0;
  for (const auto& c : classes) {
    out.push_back(running);
    running += c.num_residuals();
  }
  out.push_back(running);
  return out;
}

PointRef point_ref(const CollocationSet& set, std::size_t class_index, std::size_t point_index) {
  const auto& c = set.classes[class_index];
  return {class_index, c.kind, point_index, c.point(point_index), c.aux_of(point_index)};
}

ResidualBatch make_batch(const CollocationSet& set, Vector values) {
  require(static_cast<std::size_t>(values.size()) == set.num_residuals(),
          ErrorCode::dimension_mismatch, "residual vector length does not match collocation set");
  return {std::move(values), set.offsets()};
}

ResidualLocation locate_residual(const CollocationSet& set, std::size_t row) {
  std::size_t start = 0;
  for (std::size_t c = 0; c < set.classes.size(); ++c) {
    const auto& cls = set.classes[c];
    if (row < start + cls.num_residuals()) {
      const std::size_t local = row - start;
      return {c, local / cls.output_dim, local % cls.output_dim};
    }
    start += cls.num_residuals();
  }
  throw Error(ErrorCode::invalid_argument, "residual row " + std::to_string(row) + " out of range");
}

}  // namespace dngd
