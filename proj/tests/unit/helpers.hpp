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

#include "dngd/ad/derivatives.hpp"
#include "dngd/model/ansatz.hpp"
#include "dngd/opt/training_problem.hpp"
#include "dngd/pde/problem.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

using dngd::Matrix;
using dngd::Vector;

inline Vector random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = normal(rng);
  return v;
}

inline double rel_error(const Vector& got, const Vector& want) {
  const double den = want.norm();
  return den == 0.0 ? (got - want).norm() : (got - want).norm() / den;
}

// A parameter-free ansatz u(x) = f(x) for any scalar type.
template <class F>
class FnAnsatz final : public dngd::model::AnsatzBase<FnAnsatz<F>> {
 public:
  FnAnsatz(std::size_t input_dim, F f) : dim_(input_dim), f_(f) {}
  std::size_t input_dim() const override { return dim_; }
  std::size_t output_dim() const override { return 1; }
  std::size_t num_params() const override { return 0; }
  template <class W, class X>
  void apply(std::span<const W>, std::span<const X> x, std::span<X> out) const {
    out[0] = f_(x);
  }

 private:
  std::size_t dim_;
  F f_;
};

// Small PINN instance for oracle comparisons.
struct Pinn {
  dngd::opt::PdeTrainingProblem problem;
  Vector theta;
  dngd::CollocationSet points;

  Pinn(const std::string& name, std::vector<std::size_t> layers, std::vector<std::size_t> counts,
       std::uint64_t seed, std::size_t dim = 0)
      : problem(make(name, dim), std::move(layers), std::move(counts), 16),
        theta(problem.initial_params(seed)),
        points(problem.sample(seed + 100)) {}

  const dngd::ad::ResidualModel& model() const { return problem.residual_model(); }
  Vector gradient() const {
    const Vector r = dngd::ad::evaluate_residuals(model(), theta, points).values;
    return dngd::ad::vjp_params(model(), theta, r, points);
  }

 private:
  static std::unique_ptr<dngd::pde::PdeProblem> make(const std::string& name, std::size_t dim) {
    dngd::pde::ProblemOptions o;
    o.name = name;
    o.dim = dim;
    if (name == "poisson_ball") o.stde_k = 2;
    return dngd::pde::make_problem(o);
  }
};

// Dense Jacobian by central differences of the residual vector.
inline Matrix fd_jacobian(const dngd::ad::ResidualModel& model, const Vector& theta,
                          const dngd::CollocationSet& points, double h = 1e-6) {
  const std::size_t m = points.num_residuals();
  Matrix J(static_cast<Eigen::Index>(m), theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Vector tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    J.col(k) = (dngd::ad::evaluate_residuals(model, tp, points).values -
                dngd::ad::evaluate_residuals(model, tm, points).values) /
               (2.0 * h);
  }
  return J;
}

}  // namespace testing
