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

#include "dngd/ad/derivatives.hpp"

#include "dngd/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace dngd::ad {

namespace {

void check_params(const ResidualModel& model, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != model.num_params())
    throw Error(ErrorCode::dimension_mismatch,
                "parameter vector has length " + std::to_string(theta.size()) +
                    ", model expects " + std::to_string(model.num_params()));
}

void check_length(const Vector& v, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(v.size()) != expected)
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + " has length " +
                                                   std::to_string(v.size()) + ", expected " +
                                                   std::to_string(expected));
}

void check_finite(double value, std::size_t class_index, std::size_t point_index) {
  if (!std::isfinite(value))
    throw Error(ErrorCode::non_finite, "non-finite residual", class_index, point_index);
}

// Calls f(class_index, point_index, first_row, PointRef) for every point.
template <class F>
void for_each_point(const CollocationSet& points, F&& f) {
  std::size_t row = 0;
  for (std::size_t c = 0; c < points.classes.size(); ++c) {
    const auto& cls = points.classes[c];
    for (std::size_t i = 0; i < cls.size(); ++i) {
      f(c, i, row, point_ref(points, c, i));
      row += cls.output_dim;
    }
  }
}

struct ReverseWorkspace {
  Tape tape;
  std::vector<Var> theta;
  std::vector<Var> out;
  std::vector<double> adjoint;
};

ReverseWorkspace& reverse_workspace() {
  thread_local ReverseWorkspace ws;
  return ws;
}

// Records the residual of one point; the first n statements are the leaves.
void record_point(ReverseWorkspace& ws, const ResidualModel& model, const Vector& theta,
                  const PointRef& p, std::size_t output_dim) {
  ws.tape.clear();
  TapeScope scope(ws.tape);
  const auto n = static_cast<std::size_t>(theta.size());
  ws.theta.resize(n);
  for (std::size_t k = 0; k < n; ++k) ws.theta[k] = Var::leaf(theta[k]);
  ws.out.assign(output_dim, Var(0.0));
  model.evaluate(std::span<const Var>(ws.theta), p, std::span<Var>(ws.out));
}

// Backward sweep seeded on out[k] with weight `seed[k]`; accumulates into grad.
void sweep(ReverseWorkspace& ws, std::span<const double> seed, double* grad, std::size_t n) {
  ws.adjoint.assign(ws.tape.size(), 0.0);
  bool any = false;
  for (std::size_t k = 0; k < ws.out.size(); ++k) {
    if (ws.out[k].is_constant() || seed[k] == 0.0) continue;
    ws.adjoint[static_cast<std::size_t>(ws.out[k].index())] += seed[k];
    any = true;
  }
  if (!any) return;
  ws.tape.backward(ws.adjoint);
  for (std::size_t k = 0; k < n; ++k) grad[k] += ws.adjoint[k];
}

}  // namespace

ResidualBatch evaluate_residuals(const ResidualModel& model, const Vector& theta,
                                 const CollocationSet& points) {
  check_params(model, theta);
  Vector r(static_cast<Eigen::Index>(points.num_residuals()));
  const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
  for_each_point(points, [&](std::size_t c, std::size_t i, std::size_t row, const PointRef& p) {
    const auto& cls = points.classes[c];
    std::span<double> out(r.data() + row, cls.output_dim);
    model.evaluate(th, p, out);
    for (double& v : out) {
      v *= cls.weight;
      check_finite(v, c, i);
    }
  });
  return make_batch(points, std::move(r));
}

DirectionalDerivatives directional_derivatives(const ResidualModel& model, const Vector& theta,
                                               const Vector& v, const CollocationSet& points) {
  check_params(model, theta);
  check_length(v, model.num_params(), "direction");
  const auto n = static_cast<std::size_t>(theta.size());
  std::vector<ParamJet> th(n);
  for (std::size_t k = 0; k < n; ++k) th[k] = ParamJet(theta[k], v[k], 0.0);

  const auto m = static_cast<Eigen::Index>(points.num_residuals());
  DirectionalDerivatives result{Vector(m), Vector(m), Vector(m)};
  std::vector<ParamJet> out;
  for_each_point(points, [&](std::size_t c, std::size_t i, std::size_t row, const PointRef& p) {
    const auto& cls = points.classes[c];
    out.assign(cls.output_dim, ParamJet(0.0));
    model.evaluate(std::span<const ParamJet>(th), p, std::span<ParamJet>(out));
    for (std::size_t k = 0; k < cls.output_dim; ++k) {
      const auto idx = static_cast<Eigen::Index>(row + k);
      result.residual[idx] = cls.weight * out[k].value;
      result.jvp[idx] = cls.weight * out[k].d1;
      result.second[idx] = cls.weight * out[k].d2;
      check_finite(result.jvp[idx] + result.second[idx] + result.residual[idx], c, i);
    }
  });
  return result;
}

ResidualBatch jvp_params(const ResidualModel& model, const Vector& theta, const Vector& v,
                         const CollocationSet& points) {
  return make_batch(points, directional_derivatives(model, theta, v, points).jvp);
}

ResidualBatch second_directional(const ResidualModel& model, const Vector& theta,
                                 const Vector& v, const CollocationSet& points) {
  return make_batch(points, directional_derivatives(model, theta, v, points).second);
}

Vector vjp_params(const ResidualModel& model, const Vector& theta, const Vector& w,
                  const CollocationSet& points) {
  check_params(model, theta);
  check_length(w, points.num_residuals(), "cotangent");
  const auto n = static_cast<std::size_t>(theta.size());
  Vector grad = Vector::Zero(theta.size());
  auto& ws = reverse_workspace();
  std::vector<double> seed;
  for_each_point(points, [&](std::size_t c, std::size_t i, std::size_t row, const PointRef& p) {
    const auto& cls = points.classes[c];
    seed.resize(cls.output_dim);
    bool any = false;
    for (std::size_t k = 0; k < cls.output_dim; ++k) {
      seed[k] = cls.weight * w[static_cast<Eigen::Index>(row + k)];
      any = any || seed[k] != 0.0;
    }
    if (!any) return;
    record_point(ws, model, theta, p, cls.output_dim);
    for (const Var& o : ws.out) check_finite(o.value(), c, i);
    sweep(ws, seed, grad.data(), n);
  });
  for (Eigen::Index k = 0; k < grad.size(); ++k)
    if (!std::isfinite(grad[k])) throw Error(ErrorCode::non_finite, "non-finite gradient entry");
  return grad;
}

Matrix jacobian_rows_at(const ResidualModel& model, const Vector& theta,
                        const CollocationSet& points, std::size_t class_index,
                        std::size_t point_index) {
  check_params(model, theta);
  const auto& cls = points.classes.at(class_index);
  const auto n = static_cast<std::size_t>(theta.size());
  auto& ws = reverse_workspace();
  record_point(ws, model, theta, point_ref(points, class_index, point_index), cls.output_dim);
  Matrix rows = Matrix::Zero(static_cast<Eigen::Index>(cls.output_dim), theta.size());
  std::vector<double> seed(cls.output_dim, 0.0);
  Vector row(theta.size());
  for (std::size_t k = 0; k < cls.output_dim; ++k) {
    std::fill(seed.begin(), seed.end(), 0.0);
    seed[k] = cls.weight;
    row.setZero();
    sweep(ws, seed, row.data(), n);
    rows.row(static_cast<Eigen::Index>(k)) = row.transpose();
  }
  return rows;
}

Vector jvp_at(const ResidualModel& model, const Vector& theta, const Vector& v,
              const CollocationSet& points, std::size_t class_index, std::size_t point_index) {
  check_params(model, theta);
  check_length(v, model.num_params(), "direction");
  const auto& cls = points.classes.at(class_index);
  const auto n = static_cast<std::size_t>(theta.size());
  std::vector<ParamJet> th(n);
  for (std::size_t k = 0; k < n; ++k) th[k] = ParamJet(theta[k], v[k], 0.0);
  std::vector<ParamJet> out(cls.output_dim, ParamJet(0.0));
  model.evaluate(std::span<const ParamJet>(th), point_ref(points, class_index, point_index),
                 std::span<ParamJet>(out));
  Vector result(static_cast<Eigen::Index>(cls.output_dim));
  for (std::size_t k = 0; k < cls.output_dim; ++k) {
    result[static_cast<Eigen::Index>(k)] = cls.weight * out[k].d1;
    check_finite(result[static_cast<Eigen::Index>(k)], class_index, point_index);
  }
  return result;
}

ResidualJacobian residual_and_jacobian(const ResidualModel& model, const Vector& theta,
                                       const CollocationSet& points) {
  check_params(model, theta);
  const auto n = static_cast<std::size_t>(theta.size());
  const auto m = static_cast<Eigen::Index>(points.num_residuals());
  ResidualJacobian result{Vector(m), Matrix::Zero(m, theta.size())};
  auto& ws = reverse_workspace();
  std::vector<double> seed;
  // Row-major scratch so that each sweep writes a contiguous row.
  Vector row(theta.size());
  for_each_point(points, [&](std::size_t c, std::size_t i, std::size_t first, const PointRef& p) {
    const auto& cls = points.classes[c];
    record_point(ws, model, theta, p, cls.output_dim);
    seed.assign(cls.output_dim, 0.0);
    for (std::size_t k = 0; k < cls.output_dim; ++k) {
      const auto idx = static_cast<Eigen::Index>(first + k);
      result.residual[idx] = cls.weight * ws.out[k].value();
      check_finite(result.residual[idx], c, i);
      std::fill(seed.begin(), seed.end(), 0.0);
      seed[k] = cls.weight;
      row.setZero();
      sweep(ws, seed, row.data(), n);
      result.jacobian.row(idx) = row.transpose();
    }
  });
  if (!result.jacobian.allFinite())
    throw Error(ErrorCode::non_finite, "non-finite Jacobian entry");
  return result;
}

Matrix jacobian_by_columns(const ResidualModel& model, const Vector& theta,
                           const CollocationSet& points) {
  check_params(model, theta);
  const auto m = static_cast<Eigen::Index>(points.num_residuals());
  Matrix jac(m, theta.size());
  Vector basis = Vector::Zero(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    basis[k] = 1.0;
    jac.col(k) = jvp_params(model, theta, basis, points).values;
    basis[k] = 0.0;
  }
  return jac;
}

}  // namespace dngd::ad
