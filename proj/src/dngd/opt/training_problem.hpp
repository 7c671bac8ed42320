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
#include "dngd/model/network.hpp"
#include "dngd/pde/problem.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <type_traits>
#include <vector>

namespace dngd::opt {

// What an optimizer needs from a training task: the residual map, an initial
// parameter vector, collocation samples and an optional error metric.
class TrainingProblem {
 public:
  virtual ~TrainingProblem() = default;
  virtual const ad::ResidualModel& residual_model() const = 0;
  virtual Vector initial_params(std::uint64_t seed) const = 0;
  virtual CollocationSet sample(std::uint64_t seed) const = 0;
  virtual bool has_error_metric() const { return false; }
  virtual double error(const Vector& theta) const;
};

// Stream-separated seeds: initial weights, collocation at iteration k, ...
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// A PDE problem with an MLP ansatz and the hints the problem asks for.
class PdeTrainingProblem final : public TrainingProblem {
 public:
  PdeTrainingProblem(std::unique_ptr<pde::PdeProblem> problem, std::vector<std::size_t> layers,
                     std::vector<std::size_t> counts, std::size_t eval_points = 10000);
  PdeTrainingProblem(std::unique_ptr<pde::PdeProblem> problem, model::Network network,
                     std::vector<std::size_t> counts, std::size_t eval_points = 10000);

  const ad::ResidualModel& residual_model() const override { return *residual_; }
  Vector initial_params(std::uint64_t seed) const override;
  CollocationSet sample(std::uint64_t seed) const override;
  bool has_error_metric() const override { return problem_->has_reference(); }
  double error(const Vector& theta) const override;

  const pde::PdeProblem& problem() const { return *problem_; }
  const model::Network& network() const { return network_; }
  const std::vector<std::size_t>& counts() const { return counts_; }

 private:
  void init(std::size_t eval_points);

  std::unique_ptr<pde::PdeProblem> problem_;
  model::Network network_;
  std::unique_ptr<pde::PdeResidualModel> residual_;
  std::vector<std::size_t> counts_;
  Matrix eval_points_;
  Vector eval_exact_;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

// a . theta for any parameter scalar; the tape form is a single statement.
template <class W>
W linear_form(const double* a, std::span<const W> theta) {
  if constexpr (std::is_same_v<W, ad::Var>) {
    thread_local std::vector<ad::Var> coeffs;
    coeffs.assign(a, a + theta.size());
    return ad::dot(theta, coeffs, ad::Var(0.0));
  } else {
    W acc(0.0);
    for (std::size_t k = 0; k < theta.size(); ++k) acc = acc + theta[k] * a[k];
    return acc;
  }
}

}  // namespace detail

// r_i(theta) = a_i . theta - b_i, one residual per row of A.
class LinearResidualMap final : public ad::ResidualModelBase<LinearResidualMap> {
 public:
  LinearResidualMap(RowMatrix A, Vector b);
  std::size_t num_params() const override { return static_cast<std::size_t>(A_.cols()); }
  std::size_t num_residuals() const { return static_cast<std::size_t>(A_.rows()); }
  const RowMatrix& A() const { return A_; }
  const Vector& b() const { return b_; }

  template <class W>
  void residual(std::span<const W> theta, const PointRef& p, std::span<W> out) const {
    const double* a = A_.data() + p.index * static_cast<std::size_t>(A_.cols());
    out[0] = detail::linear_form<W>(a, theta) - W(b_[static_cast<Eigen::Index>(p.index)]);
  }

 private:
  RowMatrix A_;
  Vector b_;
};

// r_i(theta) = tanh(a_i . theta) - y_i: a cheap nonlinear map with a dense
// Jacobian, used for solver timings and randomized equivalence checks.
class TanhResidualMap final : public ad::ResidualModelBase<TanhResidualMap> {
 public:
  TanhResidualMap(RowMatrix A, Vector y);
  // Entries of A are N(0, 1/n), targets uniform in (-0.5, 0.5).
  static TanhResidualMap random(std::size_t m, std::size_t n, std::uint64_t seed);
  std::size_t num_params() const override { return static_cast<std::size_t>(A_.cols()); }
  std::size_t num_residuals() const { return static_cast<std::size_t>(A_.rows()); }
  const RowMatrix& A() const { return A_; }

  template <class W>
  void residual(std::span<const W> theta, const PointRef& p, std::span<W> out) const {
    using std::tanh;
    const double* a = A_.data() + p.index * static_cast<std::size_t>(A_.cols());
    out[0] = tanh(detail::linear_form<W>(a, theta)) - W(y_[static_cast<Eigen::Index>(p.index)]);
  }

 private:
  RowMatrix A_;
  Vector y_;
};

// One class of m index points; the point coordinate is its row number.
CollocationSet index_points(std::size_t m);

// Fixed-sample adapter around an explicit residual map.
class MapTrainingProblem final : public TrainingProblem {
 public:
  MapTrainingProblem(const ad::ResidualModel& map, std::size_t m, Vector theta0);
  const ad::ResidualModel& residual_model() const override { return map_; }
  Vector initial_params(std::uint64_t) const override { return theta0_; }
  CollocationSet sample(std::uint64_t) const override { return points_; }

 private:
  const ad::ResidualModel& map_;
  CollocationSet points_;
  Vector theta0_;
};

}  // namespace dngd::opt
