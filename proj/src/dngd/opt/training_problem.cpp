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

#include "dngd/opt/training_problem.hpp"

#include "dngd/error.hpp"
#include "dngd/model/mlp.hpp"

#include <random>
#include <string>

namespace dngd::opt {

double TrainingProblem::error(const Vector&) const {
  throw Error(ErrorCode::invalid_argument, "training problem has no error metric");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // SplitMix64 finalizer over a combination of the three inputs.
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + stream * 0xD1B54A32D192ED03ull +
                    index * 0x8CB92BA72F3D8DD7ull + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

model::Network network_for(const pde::PdeProblem& problem, std::vector<std::size_t> layers) {
  const auto hints = problem.network_hints();
  model::MlpSpec spec{std::move(layers), 0};
  spec.validate();
  if (spec.input_dim() != hints.mlp_input_width)
    throw Error(ErrorCode::config,
                problem.name() + " needs an MLP input width of " +
                    std::to_string(hints.mlp_input_width) + ", got " +
                    std::to_string(spec.input_dim()));
  if (spec.output_dim() != 1)
    throw Error(ErrorCode::config, problem.name() + " needs a scalar network output");
  return model::Network(spec, hints.embedding, hints.transform);
}

const pde::PdeProblem& checked(const std::unique_ptr<pde::PdeProblem>& problem) {
  require(problem != nullptr, ErrorCode::invalid_argument, "null problem");
  return *problem;
}

}  // namespace

PdeTrainingProblem::PdeTrainingProblem(std::unique_ptr<pde::PdeProblem> problem,
                                       std::vector<std::size_t> layers,
                                       std::vector<std::size_t> counts, std::size_t eval_points)
    : problem_(std::move(problem)),
      network_(network_for(checked(problem_), std::move(layers))),
      counts_(std::move(counts)) {
  init(eval_points);
}

PdeTrainingProblem::PdeTrainingProblem(std::unique_ptr<pde::PdeProblem> problem,
                                       model::Network network, std::vector<std::size_t> counts,
                                       std::size_t eval_points)
    : problem_(std::move(problem)), network_(std::move(network)), counts_(std::move(counts)) {
  checked(problem_);
  init(eval_points);
}

void PdeTrainingProblem::init(std::size_t eval_points) {
  require(network_.input_dim() == problem_->dim(), ErrorCode::config,
          "network input does not match the problem dimension");
  residual_ = std::make_unique<pde::PdeResidualModel>(*problem_, network_);
  const auto specs = problem_->class_specs();
  if (counts_.empty())
    for (const auto& s : specs) counts_.push_back(s.default_count);
  if (counts_.size() != specs.size())
    throw Error(ErrorCode::config, problem_->name() + " expects " +
                                       std::to_string(specs.size()) + " point counts, got " +
                                       std::to_string(counts_.size()));
  for (std::size_t c : counts_)
    require(c >= 1, ErrorCode::config, "point counts must be at least 1");
  if (problem_->has_reference() && eval_points > 0) {
    eval_points_ = problem_->evaluation_points(eval_points);
    eval_exact_.resize(eval_points_.rows());
    std::vector<double> x(static_cast<std::size_t>(eval_points_.cols()));
    for (Eigen::Index i = 0; i < eval_points_.rows(); ++i) {
      for (Eigen::Index k = 0; k < eval_points_.cols(); ++k)
        x[static_cast<std::size_t>(k)] = eval_points_(i, k);
      eval_exact_[i] = problem_->reference(x);
    }
  }
}

Vector PdeTrainingProblem::initial_params(std::uint64_t seed) const {
  model::MlpSpec spec = network_.mlp().spec();
  spec.seed = seed;
  return model::init_params(spec).data;
}

CollocationSet PdeTrainingProblem::sample(std::uint64_t seed) const {
  return problem_->sample(counts_, seed);
}

double PdeTrainingProblem::error(const Vector& theta) const {
  require(eval_points_.rows() > 0, ErrorCode::invalid_argument,
          problem_->name() + " has no evaluation grid");
  const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
  std::vector<double> pred(static_cast<std::size_t>(eval_points_.rows()));
  std::vector<double> x(static_cast<std::size_t>(eval_points_.cols()));
  for (Eigen::Index i = 0; i < eval_points_.rows(); ++i) {
    for (Eigen::Index k = 0; k < eval_points_.cols(); ++k)
      x[static_cast<std::size_t>(k)] = eval_points_(i, k);
    pred[static_cast<std::size_t>(i)] = model::value_at<double>(network_, th, x);
  }
  return pde::relative_l2_error(
      pred, std::span<const double>(eval_exact_.data(), static_cast<std::size_t>(eval_exact_.size())));
}

LinearResidualMap::LinearResidualMap(RowMatrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
  require(A_.rows() == b_.size(), ErrorCode::dimension_mismatch,
          "right-hand side length does not match the number of rows");
}

TanhResidualMap::TanhResidualMap(RowMatrix A, Vector y) : A_(std::move(A)), y_(std::move(y)) {
  require(A_.rows() == y_.size(), ErrorCode::dimension_mismatch,
          "target length does not match the number of rows");
}

TanhResidualMap TanhResidualMap::random(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  std::uniform_real_distribution<double> target(-0.5, 0.5);
  RowMatrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index k = 0; k < A.cols(); ++k) A(i, k) = normal(rng);
  Vector y(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = target(rng);
  return TanhResidualMap(std::move(A), std::move(y));
}

CollocationSet index_points(std::size_t m) {
  CollocationClass c;
  c.kind = ClassKind::interior;
  c.dim = 1;
  c.output_dim = 1;
  c.weight = 1.0;
  c.coords.resize(m);
  for (std::size_t i = 0; i < m; ++i) c.coords[i] = static_cast<double>(i);
  CollocationSet set;
  set.classes.push_back(std::move(c));
  return set;
}

MapTrainingProblem::MapTrainingProblem(const ad::ResidualModel& map, std::size_t m, Vector theta0)
    : map_(map), points_(index_points(m)), theta0_(std::move(theta0)) {
  require(static_cast<std::size_t>(theta0_.size()) == map_.num_params(),
          ErrorCode::dimension_mismatch, "initial parameters do not match the map");
}

}  // namespace dngd::opt
