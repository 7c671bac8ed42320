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

#include "dngd/opt/dngd.hpp"

#include "dngd/ad/derivatives.hpp"
#include "dngd/error.hpp"
#include "dngd/solver/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dngd::opt {

namespace {

constexpr std::uint64_t kCollocationStream = 1;
constexpr std::uint64_t kLandmarkStream = 2;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

// Cumulative time spent inside step(); strictly increasing across calls.
class StepTimer {
 public:
  explicit StepTimer(double& elapsed) : elapsed_(elapsed), start_(Clock::now()) {}
  double stop() {
    const double before = elapsed_;
    elapsed_ += std::chrono::duration<double>(Clock::now() - start_).count();
    if (!(elapsed_ > before)) elapsed_ = std::nextafter(before, std::numeric_limits<double>::infinity());
    return elapsed_;
  }

 private:
  double& elapsed_;
  Clock::time_point start_;
};

// Loss on a fixed sample; NaN if the residuals are not finite.
double sample_loss(const ad::ResidualModel& model, const Vector& theta,
                   const CollocationSet& points) {
  try {
    return ad::evaluate_residuals(model, theta, points).loss();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::non_finite) return kNaN;
    throw;
  }
}

Vector checked_initial(const TrainingProblem& problem, std::uint64_t seed,
                       std::optional<Vector> theta0) {
  Vector theta = theta0 ? std::move(*theta0) : problem.initial_params(seed);
  require(static_cast<std::size_t>(theta.size()) == problem.residual_model().num_params(),
          ErrorCode::dimension_mismatch, "initial parameters do not match the model");
  require(theta.allFinite(), ErrorCode::non_finite, "initial parameters are not finite");
  return theta;
}

}  // namespace

double lm_damping(double loss, double lambda_cap) {
  require(loss >= 0.0, ErrorCode::invalid_argument, "loss must be nonnegative");
  require(lambda_cap > 0.0, ErrorCode::invalid_argument, "lambda cap must be positive");
  return std::max(std::min(loss, lambda_cap), kLambdaFloor);
}

LineSearchResult line_search(const std::function<double(const Vector&)>& loss,
                             const Vector& theta, const Vector& delta, std::size_t points) {
  require(points >= 1, ErrorCode::invalid_argument, "line search needs at least one point");
  require(delta.allFinite(), ErrorCode::non_finite, "line search direction is not finite");
  LineSearchResult best;
  best.loss = std::numeric_limits<double>::infinity();
  best.all_nonfinite = true;
  double eta = 1.0;
  Vector trial(theta.size());
  for (std::size_t j = 0; j < points; ++j, eta *= 0.5) {
    trial = theta + eta * delta;
    const double value = loss(trial);
    ++best.evaluations;
    if (!std::isfinite(value)) continue;
    if (best.all_nonfinite || value < best.loss) {
      best.eta = eta;
      best.loss = value;
      best.all_nonfinite = false;
    }
  }
  if (best.all_nonfinite) {
    best.eta = 0.0;
    best.loss = kNaN;
  }
  return best;
}

// ---------------------------------------------------------------------------

void OptimizerConfig::validate() const {
  require(lambda_cap > 0.0, ErrorCode::config, "lambda_cap must be positive");
  require(dense_threshold >= 1, ErrorCode::config, "dense_threshold must be positive");
  require(cg_tol > 0.0, ErrorCode::config, "cg_tol must be positive");
  require(cg_max_iters >= 1, ErrorCode::config, "cg_max_iters must be positive");
  require(line_search_points >= 1, ErrorCode::config, "line_search_points must be at least 1");
  require(eval_every >= 1, ErrorCode::config, "eval_every must be at least 1");
  if (budget.kind == Budget::Kind::iterations)
    require(budget.max_iters >= 1, ErrorCode::config, "max_iters must be at least 1");
  else
    require(budget.wall_seconds > 0.0, ErrorCode::config, "wall_seconds must be positive");
}

void BaselineConfig::validate() const {
  require(learning_rate > 0.0, ErrorCode::config, "learning_rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0, ErrorCode::config, "beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, ErrorCode::config, "beta2 must lie in [0, 1)");
  require(epsilon > 0.0, ErrorCode::config, "epsilon must be positive");
  require(momentum >= 0.0 && momentum < 1.0, ErrorCode::config, "momentum must lie in [0, 1)");
  require(eval_every >= 1, ErrorCode::config, "eval_every must be at least 1");
  require(divergence_loss > 0.0, ErrorCode::config, "divergence_loss must be positive");
  if (budget.kind == Budget::Kind::iterations)
    require(budget.max_iters >= 1, ErrorCode::config, "max_iters must be at least 1");
  else
    require(budget.wall_seconds > 0.0, ErrorCode::config, "wall_seconds must be positive");
}

double TrainTrace::final_loss() const { return records.empty() ? kNaN : records.back().loss; }

double TrainTrace::final_rel_l2() const {
  for (auto it = records.rbegin(); it != records.rend(); ++it)
    if (!std::isnan(it->rel_l2)) return it->rel_l2;
  return kNaN;
}

// ---------------------------------------------------------------------------

DngdTrainer::DngdTrainer(const TrainingProblem& problem, OptimizerConfig config,
                         std::uint64_t seed, std::optional<Vector> theta0)
    : problem_(problem),
      config_(config),
      seed_(seed),
      theta_(checked_initial(problem, seed, std::move(theta0))),
      landmark_rng_(derive_seed(seed, kLandmarkStream, 0)) {
  config_.validate();
  if (!config_.resample) fixed_points_ = problem_.sample(derive_seed(seed_, kCollocationStream, 0));
}

void DngdTrainer::set_params(const Vector& theta) {
  require(theta.size() == theta_.size(), ErrorCode::dimension_mismatch,
          "parameter vector length does not match the model");
  theta_ = theta;
}

double DngdTrainer::evaluate_error() const {
  return problem_.has_error_metric() ? problem_.error(theta_) : kNaN;
}

IterationRecord DngdTrainer::step() {
  StepTimer timer(elapsed_);
  const auto& model = problem_.residual_model();
  const CollocationSet points =
      config_.resample ? problem_.sample(derive_seed(seed_, kCollocationStream, iteration_))
                       : fixed_points_;
  const std::size_t m = points.num_residuals();
  const std::size_t n = model.num_params();
  const bool dense = m < config_.dense_threshold;

  Vector r;
  Matrix J, K;
  if (dense) {
    const std::size_t bytes = solver::gramian_bytes(m, n);
    if (bytes > solver::kDefaultMemoryBudget)
      throw Error(ErrorCode::memory_budget,
                  "dense solve for m = " + std::to_string(m) + ", n = " + std::to_string(n) +
                      " exceeds the memory budget; lower dense_threshold");
    auto rj = ad::residual_and_jacobian(model, theta_, points);
    r = std::move(rj.residual);
    J = std::move(rj.jacobian);
    K = solver::gramian_from_jacobian(J);
  } else {
    r = ad::evaluate_residuals(model, theta_, points).values;
  }
  const double loss = 0.5 * r.squaredNorm();
  double lambda = lm_damping(loss, config_.lambda_cap);

  const solver::SecondAlong second =
      config_.use_ga ? solver::SecondAlong([&](const Vector& v) {
        return Vector(ad::second_directional(model, theta_, v, points).values);
      })
                     : solver::SecondAlong{};
  solver::PcgOptions pcg;
  pcg.landmarks = config_.nystrom_rank;
  pcg.tol = config_.cg_tol;
  pcg.max_iters = config_.cg_max_iters;
  pcg.nystrom.stratified = config_.stratified_landmarks;

  const auto loss_fn = [&](const Vector& theta) { return sample_loss(model, theta, points); };
  solver::StepResult step;
  LineSearchResult ls;
  for (std::size_t rejections = 0;;) {
    step = dense ? solver::dense_dual_residual_step(J, K, r, lambda, second)
                 : solver::pcg_step(model, theta_, points, lambda, pcg, config_.use_ga,
                                    landmark_rng_);
    const bool finite = step.delta.allFinite();
    if (finite) ls = line_search(loss_fn, theta_, step.delta, config_.line_search_points);
    if (finite && !ls.all_nonfinite) break;
    if (++rejections >= kMaxConsecutiveRejections)
      throw Error(ErrorCode::numerical_failure,
                  "aborted after " + std::to_string(rejections) +
                      " consecutive rejected steps at iteration " +
                      std::to_string(iteration_ + 1));
    lambda = step.lambda_used * 10.0;
  }

  IterationRecord rec;
  rec.iteration = ++iteration_;
  rec.lambda = step.lambda_used;
  rec.cg_iterations = step.cg_iterations;
  rec.ga_ratio = step.ga_ratio.value_or(kNaN);
  rec.degraded = ls.loss > loss;
  if (config_.reject_if_worse && rec.degraded) {
    rec.eta = 0.0;
    rec.loss = loss;
  } else {
    theta_ += ls.eta * step.delta;
    rec.eta = ls.eta;
    rec.loss = ls.loss;
  }
  step.eta = rec.eta;
  last_step_ = std::move(step);
  rec.wall_time = timer.stop();
  return rec;
}

// ---------------------------------------------------------------------------

BaselineTrainer::BaselineTrainer(const TrainingProblem& problem, BaselineConfig config,
                                 std::uint64_t seed, std::optional<Vector> theta0)
    : problem_(problem),
      config_(config),
      seed_(seed),
      theta_(checked_initial(problem, seed, std::move(theta0))) {
  config_.validate();
  m1_ = Vector::Zero(theta_.size());
  m2_ = Vector::Zero(theta_.size());
  if (!config_.resample) fixed_points_ = problem_.sample(derive_seed(seed_, kCollocationStream, 0));
}

void BaselineTrainer::set_params(const Vector& theta) {
  require(theta.size() == theta_.size(), ErrorCode::dimension_mismatch,
          "parameter vector length does not match the model");
  theta_ = theta;
}

double BaselineTrainer::evaluate_error() const {
  return problem_.has_error_metric() ? problem_.error(theta_) : kNaN;
}

IterationRecord BaselineTrainer::step() {
  StepTimer timer(elapsed_);
  const auto& model = problem_.residual_model();
  const CollocationSet points =
      config_.resample ? problem_.sample(derive_seed(seed_, kCollocationStream, iteration_))
                       : fixed_points_;
  const Vector r = ad::evaluate_residuals(model, theta_, points).values;
  const Vector g = ad::vjp_params(model, theta_, r, points);
  ++iteration_;

  const double lr = config_.learning_rate;
  if (config_.method == BaselineMethod::adam) {
    const double t = static_cast<double>(iteration_);
    m1_ = config_.beta1 * m1_ + (1.0 - config_.beta1) * g;
    m2_ = config_.beta2 * m2_ + (1.0 - config_.beta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config_.beta1, t);
    const double c2 = 1.0 - std::pow(config_.beta2, t);
    theta_.array() -= lr * (m1_.array() / c1) / ((m2_.array() / c2).sqrt() + config_.epsilon);
  } else {
    // Nesterov momentum in the buffer form v <- mu v + g, step g + mu v.
    m1_ = config_.momentum * m1_ + g;
    theta_ -= lr * (g + config_.momentum * m1_);
  }

  IterationRecord rec;
  rec.iteration = iteration_;
  rec.loss = sample_loss(model, theta_, points);
  rec.eta = lr;
  rec.wall_time = timer.stop();
  return rec;
}

// ---------------------------------------------------------------------------

TrainTrace run_trainer(Trainer& trainer, const Budget& budget, std::size_t eval_every,
                       const std::function<void(const IterationRecord&)>& on_record,
                       double divergence_loss) {
  TrainTrace trace;
  eval_every = std::max<std::size_t>(eval_every, 1);
  double elapsed = 0.0;
  for (;;) {
    if (budget.kind == Budget::Kind::iterations && trainer.iteration() >= budget.max_iters) break;
    if (budget.kind == Budget::Kind::wall_seconds && elapsed >= budget.wall_seconds) break;
    IterationRecord rec;
    try {
      rec = trainer.step();
    } catch (const std::exception& e) {
      trace.aborted = true;
      trace.error = e.what();
      break;
    }
    elapsed = rec.wall_time;
    const bool last = budget.kind == Budget::Kind::iterations
                          ? trainer.iteration() >= budget.max_iters
                          : elapsed >= budget.wall_seconds;
    const bool diverged = !std::isfinite(rec.loss) || rec.loss > divergence_loss;
    if (rec.iteration % eval_every == 0 || last || diverged) {
      try {
        rec.rel_l2 = trainer.evaluate_error();
      } catch (const Error&) {
        rec.rel_l2 = kNaN;
      }
    }
    trace.records.push_back(rec);
    if (on_record) on_record(rec);
    if (diverged) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

TrainTrace dngd_run(const TrainingProblem& problem, const OptimizerConfig& config,
                    std::uint64_t seed, std::optional<Vector> theta0) {
  DngdTrainer trainer(problem, config, seed, std::move(theta0));
  return run_trainer(trainer, config.budget, config.eval_every);
}

TrainTrace baseline_run(const TrainingProblem& problem, const BaselineConfig& config,
                        std::uint64_t seed, std::optional<Vector> theta0) {
  BaselineTrainer trainer(problem, config, seed, std::move(theta0));
  return run_trainer(trainer, config.budget, config.eval_every, {}, config.divergence_loss);
}

}  // namespace dngd::opt
