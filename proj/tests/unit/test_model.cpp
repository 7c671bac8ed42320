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
#include "dngd/model/mlp.hpp"
#include "dngd/model/network.hpp"

#include <doctest.h>

using namespace dngd;
using namespace dngd::model;
using testing::random_vector;

TEST_CASE("parameter counts follow the layer arithmetic") {
  CHECK(MlpSpec{{2, 50, 50, 50, 50, 3}, 0}.num_params() == 7953);
  // 10*100+100 + 3*(100*100+100) + 100+1.
  CHECK(MlpSpec{{10, 100, 100, 100, 100, 1}, 0}.num_params() == 31501);
  CHECK(MlpSpec{{10, 100, 100, 100, 100, 1}, 0}.num_params() ==
        10 * 100 + 100 + 3 * (100 * 100 + 100) + 100 + 1);
  const MlpSpec spec{{3, 7, 5, 2}, 1};
  CHECK(init_params(spec).size() == (3 + 1) * 7 + (7 + 1) * 5 + (5 + 1) * 2);
}

TEST_CASE("empty or zero-width specs are rejected") {
  CHECK_THROWS_AS(init_params(MlpSpec{{}, 0}), Error);
  CHECK_THROWS_AS(init_params(MlpSpec{{2, 0, 1}, 0}), Error);
}

TEST_CASE("initialization is reproducible and Glorot-bounded") {
  const MlpSpec spec{{4, 16, 8, 1}, 42};
  const auto a = init_params(spec), b = init_params(spec);
  CHECK(a.data == b.data);
  MlpSpec other = spec;
  other.seed = 43;
  CHECK(init_params(other).data != a.data);
  const auto layers = unflatten(a);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double fan = static_cast<double>(layers[l].weight.rows() + layers[l].weight.cols());
    CHECK(layers[l].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / fan));
    CHECK(layers[l].bias.isZero());
  }
}

TEST_CASE("flatten and unflatten are inverse") {
  const auto p = init_params(MlpSpec{{3, 5, 4, 2}, 7});
  const auto back = flatten(unflatten(p));
  CHECK(back.data == p.data);
  CHECK(back.layout.size() == p.layout.size());
  std::size_t total = 0;
  for (const auto& s : p.layout) total += s.rows * s.cols + s.rows;
  CHECK(total == p.size());
}

TEST_CASE("forward pass basics") {
  const Network net(MlpSpec{{2, 8, 8, 1}, 0});
  const std::vector<double> x{0.3, -0.7};
  SUBCASE("zero parameters give zero output") {
    CHECK(net.forward(Vector::Zero(net.num_params()), x)[0] == 0.0);
  }
  SUBCASE("a single affine layer is Wx + b") {
    const Network lin(MlpSpec{{2, 2}, 0});
    std::vector<LayerParams> layers(1);
    layers[0].weight.resize(2, 2);
    layers[0].weight << 1.0, 2.0, -3.0, 0.5;
    layers[0].bias.resize(2);
    layers[0].bias << 0.25, -1.0;
    const auto theta = flatten(layers).data;
    const auto y = lin.forward(theta, x);
    CHECK(y[0] == doctest::Approx(0.3 + 2 * -0.7 + 0.25));
    CHECK(y[1] == doctest::Approx(-3 * 0.3 + 0.5 * -0.7 - 1.0));
  }
  SUBCASE("outputs stay finite for large inputs") {
    std::mt19937_64 rng(1);
    const Vector theta = random_vector(net.num_params(), rng);
    for (int k = 0; k < 20; ++k) {
      const Vector z = random_vector(2, rng).normalized() * 10.0;
      CHECK(std::isfinite(net.forward(theta, {z.data(), 2})[0]));
    }
  }
  SUBCASE("wrong input size is an error") {
    const std::vector<double> bad{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(net.forward(Vector::Zero(net.num_params()), bad), Error);
  }
}

TEST_CASE("input jets") {
  SUBCASE("u = x1^2") {
    const testing::FnAnsatz u(2, [](auto x) { return x[0] * x[0]; });
    const std::vector<double> x{3.0, 5.0};
    const auto j1 = directional_jet<double>(u, {}, x, 0);
    CHECK(j1.value == 9.0);
    CHECK(j1.d1 == 6.0);
    CHECK(j1.d2 == 2.0);
    const auto j2 = directional_jet<double>(u, {}, x, 1);
    CHECK(j2.value == 9.0);
    CHECK(j2.d1 == 0.0);
    CHECK(j2.d2 == 0.0);
  }
  SUBCASE("Laplacian from jets matches finite differences") {
    const Network net(MlpSpec{{3, 10, 10, 1}, 4});
    const Vector theta = init_params(net.mlp().spec()).data;
    const std::vector<double> x{0.2, -0.1, 0.4};
    double lap = 0.0;
    for (std::size_t j = 0; j < 3; ++j) lap += input_jet(net, theta, x, j).d2;
    const double h = 1e-4, u0 = net.forward(theta, x)[0];
    double fd = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fd += (net.forward(theta, xp)[0] - 2 * u0 + net.forward(theta, xm)[0]) / (h * h);
    }
    CHECK(std::abs(lap - fd) <= 1e-5 * std::abs(lap));
  }
  SUBCASE("direction out of range") {
    const Network net(MlpSpec{{2, 4, 1}, 0});
    const std::vector<double> x{0.1, 0.2};
    CHECK_THROWS_AS(input_jet(net, Vector::Zero(net.num_params()), x, 2), Error);
  }
}

TEST_CASE("hard constraints") {
  std::mt19937_64 rng(3);
  SUBCASE("dirichlet_ball vanishes on the unit sphere") {
    const Network net(MlpSpec{{4, 8, 1}, 0}, Embedding::identity,
                      {TransformKind::dirichlet_ball, InitialProfile::none});
    const Vector theta = random_vector(net.num_params(), rng);
    for (int k = 0; k < 50; ++k) {
      const Vector z = random_vector(4, rng).normalized();
      CHECK(std::abs(net.forward(theta, {z.data(), 4})[0]) <= 1e-14);
    }
  }
  SUBCASE("ic_shift reproduces the initial profile at t = 0") {
    const Network heat(MlpSpec{{3, 8, 1}, 0}, Embedding::identity,
                       {TransformKind::ic_shift, InitialProfile::heat_sine_sum});
    const Network ac(MlpSpec{{3, 8, 1}, 0}, Embedding::periodic,
                     {TransformKind::ic_shift, InitialProfile::allen_cahn});
    const Vector th = random_vector(heat.num_params(), rng);
    const Vector ta = random_vector(ac.num_params(), rng);
    for (int k = 0; k < 20; ++k) {
      const double a = std::uniform_real_distribution<double>(-1, 1)(rng);
      const double b = std::uniform_real_distribution<double>(0, 1)(rng);
      const std::vector<double> xh{0.0, a, b};
      CHECK(heat.forward(th, xh)[0] ==
            doctest::Approx(std::sin(2 * M_PI * a) + std::sin(2 * M_PI * b)).epsilon(1e-13));
      const std::vector<double> xa{0.0, a};
      CHECK(ac.forward(ta, xa)[0] == doctest::Approx(a * a * std::cos(M_PI * a)).epsilon(1e-13));
    }
  }
  SUBCASE("periodic embedding has period 2 in x") {
    const Network net(MlpSpec{{3, 8, 1}, 0}, Embedding::periodic);
    const Vector theta = random_vector(net.num_params(), rng);
    const std::vector<double> p{0.3, -0.6}, q{0.3, 1.4};
    CHECK(net.forward(theta, p)[0] == doctest::Approx(net.forward(theta, q)[0]).epsilon(1e-13));
  }
}

TEST_CASE("taped MLP kernel matches the generic scalar path") {
  // Same network evaluated through the tape (dense block kernel) and through
  // parameter-space jets along each basis vector.
  for (const char* name : {"poisson2d", "heat", "allen_cahn", "poisson_ball"}) {
    CAPTURE(name);
    const std::string n = name;
    const std::size_t in = n == "poisson2d" ? 2 : (n == "poisson_ball" ? 4 : 3);
    std::vector<std::size_t> counts = n == "poisson_ball" ? std::vector<std::size_t>{5}
                                                          : std::vector<std::size_t>{5, 3};
    const testing::Pinn p(name, {in, 6, 5, 1}, counts, 8, n == "poisson_ball" ? 4 : 0);
    const Matrix taped = ad::residual_and_jacobian(p.model(), p.theta, p.points).jacobian;
    const Matrix cols = ad::jacobian_by_columns(p.model(), p.theta, p.points);
    CHECK((taped - cols).norm() <= 1e-13 * (1.0 + cols.norm()));
    std::mt19937_64 rng(2);
    const Vector w = random_vector(p.points.num_residuals(), rng);
    CHECK(testing::rel_error(ad::vjp_params(p.model(), p.theta, w, p.points),
                             cols.transpose() * w) <= 1e-13);
  }
}
