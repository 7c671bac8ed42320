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
#include "dngd/ad/jet.hpp"
#include "dngd/ad/tape.hpp"
#include "dngd/error.hpp"
#include "dngd/model/network.hpp"
#include "dngd/opt/training_problem.hpp"

#include <doctest.h>

using namespace dngd;
using testing::random_vector;
using testing::rel_error;

namespace {

opt::LinearResidualMap diag_map() {
  opt::RowMatrix A(2, 2);
  A << 1, 0, 0, 2;
  return opt::LinearResidualMap(A, Vector::Zero(2));
}

// r(theta) = theta_0^2.
class Square final : public ad::ResidualModelBase<Square> {
 public:
  std::size_t num_params() const override { return 1; }
  template <class W>
  void residual(std::span<const W> theta, const PointRef&, std::span<W> out) const {
    out[0] = theta[0] * theta[0];
  }
};

// r(theta) = log-free map that produces a NaN at point index 1.
class NanAtOne final : public ad::ResidualModelBase<NanAtOne> {
 public:
  std::size_t num_params() const override { return 1; }
  template <class W>
  void residual(std::span<const W> theta, const PointRef& p, std::span<W> out) const {
    out[0] = p.index == 1 ? theta[0] * W(std::numeric_limits<double>::quiet_NaN()) : theta[0];
  }
};

// y_k = a_k * x recorded as an external block.
class ScaleOp final : public ad::ExternalOp {
 public:
  void backward(std::span<const double> data, std::span<const std::int32_t> indices,
                std::span<const double> outputs, std::span<double> adjoint) const override {
    double sum = 0.0;
    for (std::size_t k = 0; k < outputs.size(); ++k) sum += data[k] * outputs[k];
    adjoint[static_cast<std::size_t>(indices[0])] += sum;
  }
};

}  // namespace

TEST_CASE("jvp and vjp on a diagonal linear map") {
  const auto map = diag_map();
  const auto points = opt::index_points(2);
  const Vector theta = Vector::Zero(2);
  const Vector ones = Vector::Ones(2);
  const Vector jv = ad::jvp_params(map, theta, ones, points).values;
  CHECK(jv[0] == doctest::Approx(1.0));
  CHECK(jv[1] == doctest::Approx(2.0));
  const Vector jtw = ad::vjp_params(map, theta, ones, points);
  CHECK(jtw[0] == doctest::Approx(1.0));
  CHECK(jtw[1] == doctest::Approx(2.0));
  CHECK(ad::jvp_params(map, theta, Vector::Zero(2), points).values.norm() == 0.0);
  CHECK(ad::vjp_params(map, theta, Vector::Zero(2), points).norm() == 0.0);
}

TEST_CASE("jvp rejects mismatched directions") {
  const auto map = diag_map();
  const auto points = opt::index_points(2);
  CHECK_THROWS_AS(ad::jvp_params(map, Vector::Zero(2), Vector::Zero(3), points), Error);
  CHECK_THROWS_AS(ad::vjp_params(map, Vector::Zero(2), Vector::Zero(5), points), Error);
}

TEST_CASE("non-finite residuals name the offending point") {
  const NanAtOne map;
  const auto points = opt::index_points(3);
  try {
    ad::jvp_params(map, Vector::Ones(1), Vector::Ones(1), points);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite);
    REQUIRE(e.point_index().has_value());
    CHECK(*e.point_index() == 1);
  }
}

TEST_CASE("adjoint identity on MLP residual maps") {
  std::mt19937_64 rng(5);
  for (const char* name : {"poisson2d", "heat", "allen_cahn"}) {
    const std::size_t in = std::string(name) == "allen_cahn" ? 3 : (std::string(name) == "heat" ? 3 : 2);
    for (int draw = 0; draw < 7; ++draw) {
      const testing::Pinn p(name, {in, 6, 6, 1}, {5, 3}, static_cast<std::uint64_t>(draw));
      const std::size_t m = p.points.num_residuals();
      const Vector theta = p.theta + random_vector(p.theta.size(), rng, 0.1);
      const Vector v = random_vector(p.theta.size(), rng);
      const Vector w = random_vector(m, rng);
      const double lhs = ad::jvp_params(p.model(), theta, v, p.points).values.dot(w);
      const double rhs = v.dot(ad::vjp_params(p.model(), theta, w, p.points));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("loss gradient matches central finite differences") {
  const testing::Pinn p("poisson2d", {2, 8, 8, 1}, {10, 6}, 3);
  REQUIRE(p.theta.size() <= 200);
  const auto loss = [&](const Vector& t) {
    return ad::evaluate_residuals(p.model(), t, p.points).loss();
  };
  const Vector g = p.gradient();
  Vector fd(g.size());
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    Vector tp = p.theta, tm = p.theta;
    tp[k] += h;
    tm[k] -= h;
    fd[k] = (loss(tp) - loss(tm)) / (2.0 * h);
  }
  CHECK(rel_error(g, fd) <= 1e-5);
}

TEST_CASE("gradient check on every benchmark residual map") {
  struct Case {
    const char* name;
    std::vector<std::size_t> layers;
    std::vector<std::size_t> counts;
    std::size_t dim;
  };
  const Case cases[] = {{"poisson2d", {2, 5, 1}, {4, 3}, 0},
                        {"poisson_cube", {4, 5, 1}, {4, 3}, 4},
                        {"heat", {3, 5, 1}, {4, 3}, 2},
                        {"allen_cahn", {3, 5, 1}, {4, 3}, 0},
                        {"poisson_ball", {4, 5, 1}, {4}, 4}};
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const testing::Pinn p(c.name, c.layers, c.counts, 1, c.dim);
    const Matrix fd = testing::fd_jacobian(p.model(), p.theta, p.points);
    const Vector r = ad::evaluate_residuals(p.model(), p.theta, p.points).values;
    CHECK(rel_error(p.gradient(), fd.transpose() * r) <= 1e-5);
  }
}

TEST_CASE("second directional derivative") {
  SUBCASE("affine map gives zero") {
    opt::RowMatrix A(3, 2);
    A << 1, 2, 3, 4, 5, 6;
    const opt::LinearResidualMap map(A, Vector::Ones(3));
    const Vector fvv =
        ad::second_directional(map, Vector::Ones(2), Vector::Ones(2), opt::index_points(3)).values;
    CHECK(fvv.norm() == 0.0);
  }
  SUBCASE("theta squared") {
    const Square sq;
    Vector theta(1), v(1);
    theta << 3.0;
    v << 2.0;
    const Vector fvv = ad::second_directional(sq, theta, v, opt::index_points(1)).values;
    CHECK(fvv[0] == doctest::Approx(8.0).epsilon(1e-15));
  }
  SUBCASE("matches a second difference on a small MLP") {
    const testing::Pinn p("poisson2d", {2, 6, 6, 1}, {6, 4}, 2);
    std::mt19937_64 rng(9);
    const Vector v = random_vector(p.theta.size(), rng, 0.2);
    const double h = 1e-4;
    const Vector r0 = ad::evaluate_residuals(p.model(), p.theta, p.points).values;
    const Vector rp = ad::evaluate_residuals(p.model(), p.theta + h * v, p.points).values;
    const Vector rm = ad::evaluate_residuals(p.model(), p.theta - h * v, p.points).values;
    const Vector fd = (rp - 2.0 * r0 + rm) / (h * h);
    const Vector fvv = ad::second_directional(p.model(), p.theta, v, p.points).values;
    CHECK(rel_error(fvv, fd) <= 1e-6);
  }
}

TEST_CASE("reverse Jacobian equals the column-by-column forward Jacobian") {
  for (const char* name : {"poisson2d", "allen_cahn"}) {
    const std::size_t in = std::string(name) == "allen_cahn" ? 3 : 2;
    const testing::Pinn p(name, {in, 7, 7, 1}, {6, 4}, 4);
    const auto rj = ad::residual_and_jacobian(p.model(), p.theta, p.points);
    const Matrix cols = ad::jacobian_by_columns(p.model(), p.theta, p.points);
    CHECK((rj.jacobian - cols).norm() <= 1e-13 * cols.norm());
    CHECK((rj.residual - ad::evaluate_residuals(p.model(), p.theta, p.points).values).norm() ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("Jet2 arithmetic follows truncated Taylor algebra") {
  using J = ad::Jet2<double>;
  const J f(0.7, 1.3, -0.4), g(-0.2, 0.5, 2.1);
  const J p = f * g;
  CHECK(p.d2 == doctest::Approx(f.d2 * g.value + 2 * f.d1 * g.d1 + f.value * g.d2));
  const J c(3.5);
  CHECK(c.d1 == 0.0);
  CHECK(c.d2 == 0.0);
  // tanh along x(s) = x0 + s * d1 + s^2/2 * d2.
  const J x(0.4, 0.9, 0.3);
  const J t = tanh(x);
  const double tv = std::tanh(0.4), s = 1 - tv * tv;
  CHECK(std::abs(t.d1 - s * 0.9) <= 1e-13 * std::abs(s * 0.9));
  const double d2 = s * 0.3 - 2 * tv * s * 0.9 * 0.9;
  CHECK(std::abs(t.d2 - d2) <= 1e-13 * std::abs(d2));
  const J sum = f + g;
  CHECK(sum.d2 == doctest::Approx(f.d2 + g.d2));
}

TEST_CASE("tape backward gives exact gradients") {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  const ad::Var x = ad::Var::leaf(0.3), y = ad::Var::leaf(-1.2);
  const ad::Var f = tanh(x * y) + x * x * y;
  std::vector<double> adj(tape.size(), 0.0);
  adj[static_cast<std::size_t>(f.index())] = 1.0;
  tape.backward(adj);
  const double t = std::tanh(0.3 * -1.2);
  CHECK(adj[0] == doctest::Approx((1 - t * t) * -1.2 + 2 * 0.3 * -1.2).epsilon(1e-15));
  CHECK(adj[1] == doctest::Approx((1 - t * t) * 0.3 + 0.09).epsilon(1e-15));
}

TEST_CASE("external tape blocks feed their dense adjoint") {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  const ad::Var x = ad::Var::leaf(2.0);
  const ScaleOp op;
  const double a[3] = {1.0, -2.0, 0.5};
  const ad::NodeIndex idx[1] = {x.index()};
  const ad::NodeIndex first = tape.record_external(&op, 3, a, idx);
  // z = sum_k c_k y_k with y_k = a_k x  =>  dz/dx = sum_k c_k a_k.
  const double c[3] = {0.3, 0.7, -1.1};
  ad::Var z(0.0);
  for (int k = 0; k < 3; ++k) z = z + ad::Var(a[k] * 2.0, first + k) * ad::Var(c[k]);
  std::vector<double> adj(tape.size(), 0.0);
  adj[static_cast<std::size_t>(z.index())] = 1.0;
  tape.backward(adj);
  CHECK(adj[static_cast<std::size_t>(x.index())] ==
        doctest::Approx(0.3 * 1.0 + 0.7 * -2.0 + -1.1 * 0.5));
}
