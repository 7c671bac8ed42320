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

#include "dngd/solver/dual_solve.hpp"

#include "dngd/ad/derivatives.hpp"
#include "dngd/error.hpp"
#include "dngd/solver/gramian.hpp"

#include <Eigen/Cholesky>

#include <string>

namespace dngd::solver {

namespace {

// Cholesky of A + lambda I, multiplying lambda by 10 on failure.
Eigen::LLT<Matrix> factor_shifted(const Matrix& A, double& lambda) {
  require(lambda > 0.0, ErrorCode::invalid_argument, "damping lambda must be positive");
  Matrix shifted = A;
  for (int attempt = 0; attempt <= kMaxLambdaBumps; ++attempt) {
    shifted.diagonal() = A.diagonal().array() + lambda;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) return llt;
    if (attempt < kMaxLambdaBumps) lambda *= 10.0;
  }
  throw Error(ErrorCode::numerical_failure,
              "Cholesky factorization failed after " + std::to_string(kMaxLambdaBumps) +
                  " damping increases (lambda = " + std::to_string(lambda) + ")");
}

void check_gradient(const Vector& g, Eigen::Index n) {
  require(g.size() == n, ErrorCode::dimension_mismatch, "gradient length does not match n");
  require(g.allFinite(), ErrorCode::non_finite, "gradient has non-finite entries");
}

SecondAlong second_along(const ad::ResidualModel& model, const Vector& theta,
                         const CollocationSet& points) {
  return [&model, &theta, &points](const Vector& v) {
    return ad::second_directional(model, theta, v, points).values;
  };
}

}  // namespace

void apply_acceleration(StepResult& step, Vector acceleration) {
  step.acceleration = std::move(acceleration);
  step.delta = step.velocity;
  step.ga_applied = false;
  const double v_norm = step.velocity.norm();
  if (!(v_norm > kVelocityFloor)) {
    step.ga_ratio.reset();
    return;
  }
  const double ratio = 2.0 * step.acceleration.norm() / v_norm;
  step.ga_ratio = ratio;
  if (ratio <= kGaRatioLimit) {
    step.delta += 0.5 * step.acceleration;
    step.ga_applied = true;
  }
}

namespace {

constexpr int kRefinements = 3;

// Dense solves with (J^T J + lambda I) on one Cholesky factor of K + lambda I.
class DenseDual {
 public:
  DenseDual(const Matrix& J, const Matrix& K, double& lambda)
      : J_(J), llt_(factor_shifted(K, lambda)), lambda_(lambda) {}

  // -(J^T J + lambda I)^{-1} h via y = (K + lambda I)^{-1} (-J h) and
  // x = -(J^T y + h) / lambda, then refined.
  Vector gradient_form(const Vector& h) const { return refine(gradient_solve(h), h); }

  // -(J^T J + lambda I)^{-1} J^T q. For m <= n as -J^T (K + lambda I)^{-1} q,
  // which avoids the cancellation in J^T y + h. For m > n, q has a component
  // in the null space of K that this would amplify by 1/lambda, so the
  // gradient form is used instead.
  Vector residual_form(const Vector& q) const {
    const Vector h = J_.transpose() * q;
    if (J_.rows() > J_.cols()) return gradient_form(h);
    return refine(-(J_.transpose() * llt_.solve(q)), h);
  }

 private:
  Vector gradient_solve(const Vector& h) const {
    const Vector y = llt_.solve(-(J_ * h));
    return -(J_.transpose() * y + h) / lambda_;
  }

  Vector primal_residual(const Vector& x, const Vector& h) const {
    return J_.transpose() * (J_ * x) + lambda_ * x + h;
  }

  // Iterative refinement on the primal system, kept only while it helps.
  Vector refine(Vector x, const Vector& h) const {
    Vector rho = primal_residual(x, h);
    double best = rho.norm();
    for (int k = 0; k < kRefinements && best > 0.0; ++k) {
      Vector candidate = x + gradient_solve(rho);
      Vector next = primal_residual(candidate, h);
      const double norm = next.norm();
      if (!(norm < best)) break;
      x = std::move(candidate);
      rho = std::move(next);
      best = norm;
    }
    return x;
  }

  const Matrix& J_;
  Eigen::LLT<Matrix> llt_;
  double lambda_;
};

// GA correction a = -(J^T J + lambda I)^{-1} J^T f_vv.
void dense_acceleration(StepResult& step, const DenseDual& dual, const SecondAlong& second) {
  if (!second) return;
  apply_acceleration(step, dual.residual_form(second(step.velocity)));
}

void check_shapes(const Matrix& J, const Matrix& K) {
  require(K.rows() == J.rows() && K.cols() == J.rows(), ErrorCode::dimension_mismatch,
          "Gramian does not match the Jacobian");
}

}  // namespace

StepResult dense_dual_step(const Matrix& J, const Matrix& K, const Vector& g, double lambda,
                           const SecondAlong& second) {
  check_shapes(J, K);
  check_gradient(g, J.cols());
  StepResult step;
  step.lambda_used = lambda;
  const DenseDual dual(J, K, step.lambda_used);
  step.velocity = dual.gradient_form(g);
  step.delta = step.velocity;
  dense_acceleration(step, dual, second);
  return step;
}

StepResult dense_dual_residual_step(const Matrix& J, const Matrix& K, const Vector& r,
                                    double lambda, const SecondAlong& second) {
  check_shapes(J, K);
  require(r.size() == J.rows(), ErrorCode::dimension_mismatch,
          "residual length does not match m");
  require(r.allFinite(), ErrorCode::non_finite, "residual has non-finite entries");
  StepResult step;
  step.lambda_used = lambda;
  const DenseDual dual(J, K, step.lambda_used);
  step.velocity = dual.residual_form(r);
  step.delta = step.velocity;
  dense_acceleration(step, dual, second);
  return step;
}

StepResult dense_dual_solve(const ad::ResidualModel& model, const Vector& theta, const Vector& g,
                            const CollocationSet& points, double lambda, bool use_ga) {
  const Matrix J = ad::residual_and_jacobian(model, theta, points).jacobian;
  const Matrix K = gramian_from_jacobian(J);
  return dense_dual_step(J, K, g, lambda,
                         use_ga ? second_along(model, theta, points) : SecondAlong{});
}

StepResult dense_dual_solve(const ad::ResidualModel& model, const Vector& theta,
                            const CollocationSet& points, double lambda, bool use_ga) {
  const auto rj = ad::residual_and_jacobian(model, theta, points);
  const Matrix K = gramian_from_jacobian(rj.jacobian);
  return dense_dual_residual_step(rj.jacobian, K, rj.residual, lambda,
                                  use_ga ? second_along(model, theta, points) : SecondAlong{});
}

StepResult pcg_dual_step(const GramianOperator& K, const Vector& b, const Vector& g,
                         const LinearMap& jt, double lambda, const PcgOptions& options,
                         std::mt19937_64& rng) {
  require(lambda > 0.0, ErrorCode::invalid_argument, "damping lambda must be positive");
  StepResult step;
  step.lambda_used = lambda;
  const std::size_t l = std::min(options.landmarks, K.size());
  NystromPreconditioner P;
  if (l > 0) P = nystrom_build(K, l, lambda, rng, options.nystrom);
  const LinearMap A = [&](const Vector& v) { return Vector(K.apply(v) + lambda * v); };
  const LinearMap M = [&](const Vector& v) { return precond_apply(P, v); };
  const auto cg = pcg_solve(A, l > 0 ? M : LinearMap{}, b, options.tol, options.max_iters);
  step.cg_iterations = cg.iterations;
  step.cg_breakdown = cg.breakdown;
  step.cg_converged = cg.converged;
  step.velocity = -(jt(cg.x) + g) / lambda;
  step.delta = step.velocity;
  return step;
}

namespace {

// Shared matrix-free machinery: (K + lambda I) solves by Nystrom-PCG on one
// preconditioner, and the recovery map J^T.
class MatrixFreeDual {
 public:
  MatrixFreeDual(const ad::ResidualModel& model, const Vector& theta,
                 const CollocationSet& points, double lambda, const PcgOptions& options,
                 std::mt19937_64& rng)
      : model_(model), theta_(theta), points_(points), K_(model, theta, points),
        lambda_(lambda), options_(options) {
    require(lambda > 0.0, ErrorCode::invalid_argument, "damping lambda must be positive");
    const std::size_t l = std::min(options.landmarks, K_.size());
    if (l > 0) {
      P_ = nystrom_build(model, theta, points, l, lambda, rng, options.nystrom);
      precond_ = [this](const Vector& v) { return precond_apply(P_, v); };
    }
  }

  MatrixFreeDual(const MatrixFreeDual&) = delete;
  MatrixFreeDual& operator=(const MatrixFreeDual&) = delete;

  PcgResult solve(const Vector& b) const {
    const LinearMap A = [&](const Vector& v) { return Vector(K_.apply(v) + lambda_ * v); };
    return pcg_solve(A, precond_, b, options_.tol, options_.max_iters);
  }
  Vector jt(const Vector& y) const { return ad::vjp_params(model_, theta_, y, points_); }
  Vector jv(const Vector& v) const { return ad::jvp_params(model_, theta_, v, points_).values; }
  Vector second(const Vector& v) const {
    return ad::second_directional(model_, theta_, v, points_).values;
  }

  // a = -J^T (K + lambda I)^{-1} f_vv, or through the gradient form with
  // h = J^T f_vv when m > n.
  void accelerate(StepResult& step) const {
    const Vector f_vv = second(step.velocity);
    if (K_.size() > model_.num_params()) {
      const Vector h = jt(f_vv);
      const auto cg = solve(-jv(h));
      record(step, cg);
      apply_acceleration(step, -(jt(cg.x) + h) / lambda_);
      return;
    }
    const auto cg = solve(f_vv);
    record(step, cg);
    apply_acceleration(step, -jt(cg.x));
  }

  static void record(StepResult& step, const PcgResult& cg) {
    step.cg_iterations += cg.iterations;
    step.cg_breakdown = step.cg_breakdown || cg.breakdown;
    step.cg_converged = step.cg_converged && cg.converged;
  }

 private:
  const ad::ResidualModel& model_;
  const Vector& theta_;
  const CollocationSet& points_;
  ResidualGramian K_;
  double lambda_;
  PcgOptions options_;
  NystromPreconditioner P_;
  LinearMap precond_;
};

}  // namespace

StepResult pcg_step(const ad::ResidualModel& model, const Vector& theta, const Vector& g,
                    const CollocationSet& points, double lambda, const PcgOptions& options,
                    bool use_ga, std::mt19937_64& rng) {
  check_gradient(g, theta.size());
  const MatrixFreeDual dual(model, theta, points, lambda, options, rng);
  StepResult step;
  step.lambda_used = lambda;
  const auto cg = dual.solve(-dual.jv(g));
  MatrixFreeDual::record(step, cg);
  step.velocity = -(dual.jt(cg.x) + g) / lambda;
  step.delta = step.velocity;
  if (use_ga) dual.accelerate(step);
  return step;
}

StepResult pcg_step(const ad::ResidualModel& model, const Vector& theta,
                    const CollocationSet& points, double lambda, const PcgOptions& options,
                    bool use_ga, std::mt19937_64& rng) {
  const Vector r = ad::evaluate_residuals(model, theta, points).values;
  require(r.allFinite(), ErrorCode::non_finite, "residual has non-finite entries");
  if (static_cast<std::size_t>(r.size()) > model.num_params())
    return pcg_step(model, theta, ad::vjp_params(model, theta, r, points), points, lambda, options,
                    use_ga, rng);
  const MatrixFreeDual dual(model, theta, points, lambda, options, rng);
  StepResult step;
  step.lambda_used = lambda;
  const auto cg = dual.solve(r);
  MatrixFreeDual::record(step, cg);
  step.velocity = -dual.jt(cg.x);
  step.delta = step.velocity;
  if (use_ga) dual.accelerate(step);
  return step;
}

Vector primal_gn_solve(const ad::ResidualModel& model, const Vector& theta, const Vector& g,
                       const CollocationSet& points, double lambda) {
  const Matrix J = ad::jacobian_by_columns(model, theta, points);
  return primal_gn_step(J, g, lambda).delta;
}

StepResult primal_gn_step(const Matrix& J, const Vector& g, double lambda,
                          const SecondAlong& second) {
  check_gradient(g, J.cols());
  StepResult step;
  step.lambda_used = lambda;
  Matrix G = Matrix::Zero(J.cols(), J.cols());
  G.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  const auto llt = factor_shifted(G, step.lambda_used);
  step.velocity = llt.solve(-g);
  step.delta = step.velocity;
  if (second) {
    const Vector f_vv = second(step.velocity);
    apply_acceleration(step, llt.solve(-(J.transpose() * f_vv)));
  }
  return step;
}

StepResult primal_gn_step(const ad::ResidualModel& model, const Vector& theta, const Vector& g,
                          const CollocationSet& points, double lambda, bool use_ga) {
  const Matrix J = ad::jacobian_by_columns(model, theta, points);
  return primal_gn_step(J, g, lambda,
                        use_ga ? second_along(model, theta, points) : SecondAlong{});
}

}  // namespace dngd::solver
