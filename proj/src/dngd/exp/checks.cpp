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


#include "dngd/exp/checks.hpp"

#include "dngd/ad/derivatives.hpp"
#include "dngd/opt/dngd.hpp"
#include "dngd/opt/training_problem.hpp"
#include "dngd/pde/stde.hpp"
#include "dngd/solver/dual_solve.hpp"
#include "dngd/solver/gramian.hpp"
#include "dngd/solver/nystrom.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace dngd::exp {

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

Outcome bound(double worst, double tol) {
  return {worst <= tol, "worst " + sci(worst) + ", tolerance " + sci(tol)};
}

double rel(const Vector& a, const Vector& b) {
  const double den = b.norm();
  return den == 0.0 ? (a - b).norm() : (a - b).norm() / den;
}

// Small MLP on the 2-d Poisson problem.
struct SmallPinn {
  opt::PdeTrainingProblem problem;
  Vector theta;
  CollocationSet points;

  explicit SmallPinn(std::uint64_t seed)
      : problem(pde::make_problem({}), std::vector<std::size_t>{2, 8, 8, 1},
                std::vector<std::size_t>{16, 6}, 64),
        theta(problem.initial_params(seed)),
        points(problem.sample(seed + 1)) {}
};

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = normal(rng);
  return v;
}

Outcome primal_dual() {
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (std::size_t m : {10, 40})
    for (std::size_t n : {12, 60})
      for (double lambda : {1e-6, 1e-3, 1.0}) {
        const auto map = opt::TanhResidualMap::random(m, n, seed++);
        const auto points = opt::index_points(m);
        std::mt19937_64 rng(seed);
        const Vector theta = 0.3 * random_vector(n, rng);
        const Vector g = ad::vjp_params(map, theta,
                                        ad::evaluate_residuals(map, theta, points).values, points);
        const Vector dual = solver::dense_dual_solve(map, theta, points, lambda, false).delta;
        const Vector primal = solver::primal_gn_solve(map, theta, g, points, lambda);
        worst = std::max(worst, rel(dual, primal));
      }
  return bound(worst, 1e-8);
}

Outcome ga_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const SmallPinn s(seed);
    const auto& model = s.problem.residual_model();
    const Vector g = ad::vjp_params(
        model, s.theta, ad::evaluate_residuals(model, s.theta, s.points).values, s.points);
    const double lambda = 1e-3;
    const auto dual = solver::dense_dual_solve(model, s.theta, s.points, lambda, true);
    const auto primal = solver::primal_gn_step(model, s.theta, g, s.points, lambda, true);
    worst = std::max(worst, rel(dual.acceleration, primal.acceleration));
  }
  return bound(worst, 1e-8);
}

Outcome kvp_matches_gramian() {
  const SmallPinn s(3);
  const auto& model = s.problem.residual_model();
  const Matrix K = solver::assemble_gramian(model, s.theta, s.points).K;
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Vector v = random_vector(static_cast<std::size_t>(K.rows()), rng);
    const double lambda = 1e-2;
    const Vector got = solver::kvp(model, s.theta, v, lambda, s.points).values;
    const Vector want = K * v + lambda * v;
    worst = std::max(worst, (got - want).norm());
  }
  return bound(worst, 1e-10);
}

Outcome nystrom_full_rank() {
  const SmallPinn s(5);
  const Matrix K = solver::assemble_gramian(s.problem.residual_model(), s.theta, s.points).K;
  const solver::ExplicitGramian op(K);
  std::vector<std::size_t> all(static_cast<std::size_t>(K.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const double lambda = 1e-3;
  solver::NystromOptions opts;
  opts.relative_threshold = 0.0;
  const auto P = solver::nystrom_from_landmarks(op, all, lambda, opts);
  const Matrix approx = P.U * P.eigenvalues.asDiagonal() * P.U.transpose();
  const double recon = (approx - K).norm() / K.norm();
  std::mt19937_64 rng(2);
  const Vector v = random_vector(all.size(), rng);
  const Vector back = solver::precond_apply(P, K * v + lambda * v);
  return bound(std::max(recon, (back - v).norm() / v.norm()), 1e-8);
}

Outcome pcg_matches_dense() {
  const SmallPinn s(7);
  const auto& model = s.problem.residual_model();
  const Vector g = ad::vjp_params(
      model, s.theta, ad::evaluate_residuals(model, s.theta, s.points).values, s.points);
  const double lambda = 1e-3;
  const Vector dense = solver::dense_dual_solve(model, s.theta, g, s.points, lambda, false).delta;
  solver::PcgOptions opts;
  opts.landmarks = 8;
  opts.tol = 1e-10;
  std::mt19937_64 rng(4);
  const Vector pcg = solver::pcg_step(model, s.theta, s.points, lambda, opts, false, rng).delta;
  return bound(rel(pcg, dense), 1e-6);
}

Outcome jacobian_modes_agree() {
  const SmallPinn s(9);
  const auto& model = s.problem.residual_model();
  const Matrix reverse = ad::residual_and_jacobian(model, s.theta, s.points).jacobian;
  const Matrix forward = ad::jacobian_by_columns(model, s.theta, s.points);
  return bound((reverse - forward).norm() / forward.norm(), 1e-12);
}

Outcome gradient_finite_difference() {
  const SmallPinn s(13);
  const auto& model = s.problem.residual_model();
  const auto loss = [&](const Vector& t) {
    return ad::evaluate_residuals(model, t, s.points).loss();
  };
  const Vector g = ad::vjp_params(
      model, s.theta, ad::evaluate_residuals(model, s.theta, s.points).values, s.points);
  std::mt19937_64 rng(8);
  const Vector u = random_vector(g.size(), rng).normalized();
  const double h = 1e-5;
  const double fd = (loss(s.theta + h * u) - loss(s.theta - h * u)) / (2.0 * h);
  const double ad = g.dot(u);
  return bound(std::abs(fd - ad) / std::max(1.0, std::abs(ad)), 1e-6);
}

Outcome stde_subset_average() {
  const std::size_t d = 4;
  const model::Network net(model::MlpSpec{{d, 8, 8, 1}, 3});
  const Vector theta = model::init_params(net.mlp().spec()).data;
  const std::vector<double> x{0.1, -0.2, 0.3, 0.05};
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint32_t a = 0; a < d; ++a)
    for (std::uint32_t b = a + 1; b < d; ++b) {
      const std::uint32_t subset[2] = {a, b};
      sum += pde::stde_laplacian(net, theta, x, subset);
      ++count;
    }
  const double exact = pde::exact_laplacian(net, theta, x);
  return bound(std::abs(sum / static_cast<double>(count) - exact), 1e-10);
}

Outcome linear_least_squares() {
  std::mt19937_64 rng(21);
  opt::RowMatrix A(30, 8);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = normal(rng);
  const Vector b = random_vector(30, rng);
  const opt::LinearResidualMap map(A, b);
  const opt::MapTrainingProblem problem(map, 30, Vector::Zero(8));
  opt::OptimizerConfig config;
  config.lambda_cap = 1e-12;
  config.budget = opt::Budget::iterations(3);
  config.resample = false;
  opt::DngdTrainer trainer(problem, config, 0);
  for (int k = 0; k < 3; ++k) trainer.step();
  const Matrix Ad = A;
  const Vector exact = Ad.colPivHouseholderQr().solve(b);
  return bound(rel(trainer.params(), exact), 1e-8);
}

Outcome line_search_grid() {
  std::size_t calls = 0;
  const Vector theta = Vector::Zero(1);
  const Vector delta = Vector::Ones(1);
  const auto quadratic = [&](const Vector& t) {
    ++calls;
    return (t[0] - 1.0) * (t[0] - 1.0) + 0.5;
  };
  const auto ls = opt::line_search(quadratic, theta, delta, 31);
  const auto increasing = opt::line_search([](const Vector& t) { return t[0]; }, theta, delta, 31);
  const bool ok = ls.eta == 1.0 && calls == 31 && increasing.eta == std::ldexp(1.0, -30);
  return {ok, "eta " + sci(ls.eta) + ", evaluations " + std::to_string(calls) +
                  ", monotone eta " + sci(increasing.eta)};
}

struct Entry {
  const char* name;
  const char* description;
  Outcome (*run)();
};

constexpr Entry kChecks[] = {
    {"primal_dual_equivalence", "dual and primal LM steps agree on random tanh maps",
     primal_dual},
    {"ga_equivalence", "dual and primal geodesic-acceleration corrections agree", ga_equivalence},
    {"kvp_vs_gramian", "matrix-free kernel products match the assembled Gramian",
     kvp_matches_gramian},
    {"nystrom_full_sampling", "Nystrom with every landmark reproduces K and inverts K + lambda I",
     nystrom_full_rank},
    {"pcg_vs_dense", "preconditioned CG step matches the dense dual step", pcg_matches_dense},
    {"jacobian_modes", "reverse-mode and forward-mode Jacobians agree", jacobian_modes_agree},
    {"gradient_fd", "loss gradient matches a central finite difference",
     gradient_finite_difference},
    {"stde_unbiased", "STDE averaged over all subsets equals the Laplacian", stde_subset_average},
    {"linear_least_squares", "D-NGD solves a linear least-squares problem in three steps",
     linear_least_squares},
    {"line_search", "line search picks the right grid point with 31 evaluations",
     line_search_grid},
};

}  // namespace

std::vector<CheckInfo> list_checks() {
  std::vector<CheckInfo> out;
  for (const auto& c : kChecks) out.push_back({c.name, c.description});
  return out;
}

std::vector<CheckResult> run_checks(const std::function<void(const CheckResult&)>& report) {
  std::vector<CheckResult> out;
  for (const auto& c : kChecks) {
    CheckResult r{c.name, false, {}};
    try {
      const Outcome o = c.run();
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dngd::exp
