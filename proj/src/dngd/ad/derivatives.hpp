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

namespace dngd::ad {

// Scaled residual vector r(theta).
ResidualBatch evaluate_residuals(const ResidualModel& model, const Vector& theta,
                                 const CollocationSet& points);

// J(theta) v, one forward jet pass per point.
ResidualBatch jvp_params(const ResidualModel& model, const Vector& theta, const Vector& v,
                         const CollocationSet& points);

// J(theta)^T w, one reverse sweep per point.
Vector vjp_params(const ResidualModel& model, const Vector& theta, const Vector& w,
                  const CollocationSet& points);

// d^2/dt^2 r(theta + t v) at t = 0, exact through a parameter-space 2-jet.
ResidualBatch second_directional(const ResidualModel& model, const Vector& theta,
                                 const Vector& v, const CollocationSet& points);

// Residual together with J v and f_vv from the same jet pass.
struct DirectionalDerivatives {
  Vector residual;
  Vector jvp;
  Vector second;
};
DirectionalDerivatives directional_derivatives(const ResidualModel& model, const Vector& theta,
                                               const Vector& v, const CollocationSet& points);

// Residual and the full m x n Jacobian, one reverse sweep per scalar residual.
struct ResidualJacobian {
  Vector residual;
  Matrix jacobian;
};
ResidualJacobian residual_and_jacobian(const ResidualModel& model, const Vector& theta,
                                       const CollocationSet& points);

// Rows of J for a single collocation point (output_dim x n, scaled).
Matrix jacobian_rows_at(const ResidualModel& model, const Vector& theta,
                        const CollocationSet& points, std::size_t class_index,
                        std::size_t point_index);

// J_i v for a single collocation point (output_dim entries, scaled).
Vector jvp_at(const ResidualModel& model, const Vector& theta, const Vector& v,
              const CollocationSet& points, std::size_t class_index, std::size_t point_index);

// Reference Jacobian assembled column by column with jvp_params on basis
// vectors. Meant for oracles on small n.
Matrix jacobian_by_columns(const ResidualModel& model, const Vector& theta,
                           const CollocationSet& points);

}  // namespace dngd::ad
