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


#include "helpers.hpp"

#include "dngd/ad/derivatives.hpp"
#include "dngd/error.hpp"
#include "dngd/model/network.hpp"
#include "dngd/pde/problem.hpp"
#include "dngd/pde/stde.hpp"

#include <doctest.h>

#include <numbers>

using namespace dngd;
using testing::FnAnsatz;

namespace {

constexpr double kPi = std::numbers::pi;

std::unique_ptr<pde::PdeProblem> problem(const std::string& name, std::size_t dim = 0,
                                         std::size_t k = 0) {
  pde::ProblemOptions o;
  o.name = name;
  o.dim = dim;
  o.stde_k = k;
  return pde::make_problem(o);
}

Vector residuals(const pde::PdeProblem& p, const model::Ansatz& u, const CollocationSet& pts) {
  const pde::PdeResidualModel model(p, u);
  return ad::evaluate_residuals(model, Vector(), pts).values;
}

std::vector<double> class_values(const pde::PdeProblem& p, const model::Ansatz& u,
                                 const CollocationSet& pts, std::size_t cls) {
  const Vector r = residuals(p, u, pts);
  const auto off = pts.offsets();
  const double w = pts.classes[cls].weight;
  std::vector<double> out;
  for (std::size_t i = off[cls]; i < off[cls + 1]; ++i) out.push_back(r[static_cast<Eigen::Index>(i)] / w);
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("Poisson 2-d sampling") {
  const auto p = problem("poisson2d");
  const std::size_t counts[] = {8, 4};
  const auto set = p->sample(counts, 11);
  REQUIRE(set.classes.size() == 2);
  CHECK(set.classes[0].size() == 8);
  CHECK(set.classes[1].size() == 4);
  for (std::size_t i = 0; i < 8; ++i)
    for (double c : set.classes[0].point(i)) CHECK((c > 0.0 && c < 1.0));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto x = set.classes[1].point(i);
    const bool on_face = x[0] == 0.0 || x[0] == 1.0 || x[1] == 0.0 || x[1] == 1.0;
    CHECK(on_face);
  }
  const auto again = p->sample(counts, 11);
  CHECK(again.classes[0].coords == set.classes[0].coords);
  CHECK(again.classes[1].coords == set.classes[1].coords);
  for (const auto& c : set.classes) CHECK(c.weight == doctest::Approx(1.0 / std::sqrt(double(c.size()))));
}

TEST_CASE("sampling rejects empty classes") {
  const auto p = problem("poisson2d");
  const std::size_t counts[] = {8, 0};
  CHECK_THROWS_AS(p->sample(counts, 0), Error);
}

TEST_CASE("residual count arithmetic") {
  const auto heat = problem("heat");
  const std::size_t counts[] = {100, 10};
  CHECK(heat->sample(counts, 0).num_residuals() == 110);
}

TEST_CASE("heat exact solution has zero residual") {
  for (std::size_t d : {2u, 10u}) {
    const auto p = problem("heat", d);
    const FnAnsatz u(d + 1, [](auto x) {
      using X = std::decay_t<decltype(x[0])>;
      using std::exp;
      using std::sin;
      X s(0.0);
      for (std::size_t i = 1; i < x.size(); ++i) s = s + sin(x[i] * X(2.0 * kPi));
      return exp(x[0] * X(-kPi * kPi)) * s;
    });
    const std::size_t counts[] = {100, 100};
    const auto pts = p->sample(counts, 3);
    CHECK(max_abs(class_values(*p, u, pts, 0)) <= 1e-10);
    CHECK(max_abs(class_values(*p, u, pts, 1)) <= 1e-8);
  }
}

TEST_CASE("Poisson 10-d exact solution and zero network") {
  const auto p = problem("poisson_cube", 10);
  const FnAnsatz exact(10, [](auto x) {
    using X = std::decay_t<decltype(x[0])>;
    X s(0.0);
    for (std::size_t k = 0; k + 1 < x.size(); k += 2) s = s + x[k] * x[k + 1];
    return s;
  });
  const std::size_t counts[] = {100, 100};
  const auto pts = p->sample(counts, 5);
  CHECK(max_abs(class_values(*p, exact, pts, 0)) <= 1e-12);
  CHECK(max_abs(class_values(*p, exact, pts, 1)) <= 1e-8);
  // f = 0 in the interior, so a zero output leaves no interior residual.
  const FnAnsatz zero(10, [](auto x) { return std::decay_t<decltype(x[0])>(0.0); });
  CHECK(max_abs(class_values(*p, zero, pts, 0)) == 0.0);
}

TEST_CASE("Poisson 2-d exact solution") {
  const auto p = problem("poisson2d");
  const FnAnsatz exact(2, [](auto x) {
    using X = std::decay_t<decltype(x[0])>;
    using std::sin;
    return sin(x[0] * X(kPi)) * sin(x[1] * X(kPi));
  });
  const std::size_t counts[] = {100, 100};
  const auto pts = p->sample(counts, 9);
  CHECK(max_abs(class_values(*p, exact, pts, 0)) <= 1e-8);
  CHECK(max_abs(class_values(*p, exact, pts, 1)) <= 1e-8);
}

TEST_CASE("ball Poisson with the full subset is exact on its solution") {
  const std::size_t d = 6;
  const auto p = problem("poisson_ball", d, d);
  std::mt19937_64 rng(7);  // default coefficient seed
  std::normal_distribution<double> normal;
  std::vector<double> c(d - 1);
  for (double& v : c) v = normal(rng);
  const FnAnsatz exact(d, [c](auto x) {
    using X = std::decay_t<decltype(x[0])>;
    using std::cos;
    using std::sin;
    X r2(0.0), s(0.0);
    for (const auto& xi : x) r2 = r2 + xi * xi;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      s = s + (sin(x[i] + cos(x[i + 1])) + x[i + 1] * cos(x[i])) * X(c[i]);
    return (X(1.0) - r2) * s;
  });
  const std::size_t counts[] = {100};
  const auto pts = p->sample(counts, 2);
  CHECK(max_abs(class_values(*p, exact, pts, 0)) <= 1e-8);
  const std::vector<double> x(d, 0.1);
  CHECK(p->reference(x) == doctest::Approx(model::value_at<double>(exact, {}, x)).epsilon(1e-14));
}

TEST_CASE("loss equals the weighted sum of raw squared residuals") {
  const testing::Pinn pinn("poisson2d", {2, 8, 1}, {13, 7}, 4);
  const auto& prob = pinn.problem.problem();
  const auto& net = pinn.problem.network();
  double direct = 0.0;
  for (std::size_t c = 0; c < pinn.points.classes.size(); ++c) {
    const auto& cls = pinn.points.classes[c];
    double sum = 0.0;
    for (std::size_t i = 0; i < cls.size(); ++i) {
      double r = 0.0;
      prob.residual(net, std::span<const double>(pinn.theta.data(), pinn.theta.size()),
                    point_ref(pinn.points, c, i), std::span<double>(&r, 1));
      sum += r * r;
    }
    direct += 0.5 * sum / static_cast<double>(cls.size());
  }
  const double loss = ad::evaluate_residuals(pinn.model(), pinn.theta, pinn.points).loss();
  CHECK(std::abs(loss - direct) <= 1e-12 * direct);
}

TEST_CASE("STDE Laplacian") {
  std::mt19937_64 rng(1);
  SUBCASE("|x|^2 gives 2d for any subset") {
    const FnAnsatz u(5, [](auto x) {
      using X = std::decay_t<decltype(x[0])>;
      X s(0.0);
      for (const auto& xi : x) s = s + xi * xi;
      return s;
    });
    // The estimator only needs an Ansatz; go through the generic template.
    const std::vector<double> x{0.1, 0.2, -0.3, 0.4, 0.5};
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto subset = pde::draw_coordinate_subset(5, k, rng);
      const double est = pde::stde_estimate<double>(u, {}, x, subset);
      CHECK(est == doctest::Approx(10.0).epsilon(1e-14));
    }
  }
  SUBCASE("x1^2 in four dimensions") {
    const FnAnsatz u(4, [](auto x) { return x[0] * x[0]; });
    const std::vector<double> x{0.3, 0.1, 0.2, 0.4};
    double avg = 0.0;
    for (std::uint32_t j = 0; j < 4; ++j) {
      const std::uint32_t s[1] = {j};
      const double est = pde::stde_estimate<double>(u, {}, x, s);
      CHECK(est == (j == 0 ? 8.0 : 0.0));
      avg += est / 4.0;
    }
    CHECK(avg == 2.0);
  }
  SUBCASE("full subset equals the exact Laplacian") {
    const model::Network net(model::MlpSpec{{5, 12, 12, 1}, 2});
    const Vector theta = model::init_params(net.mlp().spec()).data;
    const std::vector<double> x{0.1, -0.4, 0.2, 0.3, -0.1};
    const std::uint32_t all[5] = {0, 1, 2, 3, 4};
    const double full = pde::stde_laplacian(net, theta, x, all);
    double sum = 0.0;
    for (std::size_t j = 0; j < 5; ++j) sum += model::input_jet(net, theta, x, j).d2;
    CHECK(std::abs(full - sum) <= 1e-12 * std::max(1.0, std::abs(sum)));
  }
  SUBCASE("k > d is an error") {
    const model::Network net(model::MlpSpec{{3, 4, 1}, 0});
    const std::vector<double> x{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(pde::stde_laplacian(net, Vector::Zero(net.num_params()), x, 4, rng), Error);
  }
}

TEST_CASE("relative L2 error") {
  const std::vector<double> exact{1.0, -2.0, 3.0};
  const std::vector<double> zero(3, 0.0);
  std::vector<double> scaled = exact;
  for (double& v : scaled) v *= 1.1;
  CHECK(pde::relative_l2_error(exact, exact) == 0.0);
  CHECK(pde::relative_l2_error(zero, exact) == 1.0);
  CHECK(pde::relative_l2_error(scaled, exact) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK_THROWS_AS(pde::relative_l2_error(exact, zero), Error);
}

TEST_CASE("problem registry") {
  const auto list = pde::list_problems();
  CHECK(list.size() == 5);
  CHECK_THROWS_AS(problem("navier_stokes"), Error);
}
