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

#include "dngd/error.hpp"
#include "dngd/pde/allen_cahn_reference.hpp"
#include "dngd/pde/problem.hpp"
#include "dngd/pde/stde.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace dngd::pde {

namespace {

constexpr double kPi = std::numbers::pi;

CollocationClass make_class(ClassKind kind, std::size_t dim, std::size_t count,
                            std::size_t output_dim = 1) {
  CollocationClass c;
  c.kind = kind;
  c.dim = dim;
  c.output_dim = output_dim;
  c.weight = 1.0 / std::sqrt(static_cast<double>(count));
  c.coords.resize(count * dim);
  return c;
}

void check_counts(const PdeProblem& problem, std::span<const std::size_t> counts) {
  const auto specs = problem.class_specs();
  require(counts.size() == specs.size(), ErrorCode::invalid_argument,
          problem.name() + " expects " + std::to_string(specs.size()) + " point counts, got " +
              std::to_string(counts.size()));
  for (std::size_t c = 0; c < counts.size(); ++c)
    require(counts[c] >= 1, ErrorCode::invalid_argument,
            std::string("point count for class '") + to_string(specs[c].kind) +
                "' must be at least 1");
}

// Uniform points in the box [lo, hi]^dim.
void fill_box(CollocationClass& c, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : c.coords) v = dist(rng);
}

// Uniform points on the boundary of [0,1]^dim; all faces have unit area, so
// a face is picked uniformly and the remaining coordinates are uniform.
void fill_cube_boundary(CollocationClass& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> face(0, 2 * c.dim - 1);
  for (std::size_t i = 0; i < c.size(); ++i) {
    double* x = c.coords.data() + i * c.dim;
    for (std::size_t k = 0; k < c.dim; ++k) x[k] = unit(rng);
    const std::size_t f = face(rng);
    x[f / 2] = (f % 2 == 0) ? 0.0 : 1.0;
  }
}

Matrix halton_box(std::size_t count, std::size_t dim, double lo, double hi) {
  Matrix pts(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < count; ++i) {
    const auto h = halton_point(i + 1, dim);
    for (std::size_t k = 0; k < dim; ++k)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = lo + (hi - lo) * h[k];
  }
  return pts;
}

// ---------------------------------------------------------------------------
// -Laplace(u) = 2 pi^2 sin(pi x) sin(pi y) on [0,1]^2, u = 0 on the boundary.
class Poisson2d final : public PdeProblemBase<Poisson2d> {
 public:
  std::string name() const override { return "poisson2d"; }
  std::string description() const override {
    return "Poisson on [0,1]^2, u* = sin(pi x) sin(pi y), homogeneous Dirichlet";
  }
  std::size_t dim() const override { return 2; }
  std::vector<ClassSpec> class_specs() const override {
    return {{ClassKind::interior, 1, 500}, {ClassKind::boundary, 1, 100}};
  }
  NetworkHints network_hints() const override { return {2}; }

  CollocationSet sample(std::span<const std::size_t> counts, std::uint64_t seed) const override {
    check_counts(*this, counts);
    std::mt19937_64 rng(seed);
    CollocationSet set;
    set.classes.push_back(make_class(ClassKind::interior, 2, counts[0]));
    fill_box(set.classes.back(), 0.0, 1.0, rng);
    set.classes.push_back(make_class(ClassKind::boundary, 2, counts[1]));
    fill_cube_boundary(set.classes.back(), rng);
    return set;
  }

  bool has_reference() const override { return true; }
  double reference(std::span<const double> x) const override {
    return std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
  }
  Matrix evaluation_points(std::size_t count) const override {
    return halton_box(count, 2, 0.0, 1.0);
  }

  template <class W>
  void residual_impl(const Ansatz& u, std::span<const W> theta, const PointRef& p,
                     std::span<W> out) const {
    if (p.kind == ClassKind::interior) {
      const auto jx = model::directional_jet<W>(u, theta, p.x, 0);
      const auto jy = model::directional_jet<W>(u, theta, p.x, 1);
      const double f = 2.0 * kPi * kPi * reference(p.x);
      out[0] = W(0.0) - (jx.d2 + jy.d2) - W(f);
    } else {
      out[0] = model::value_at<W>(u, theta, p.x);
    }
  }
};

// ---------------------------------------------------------------------------
// Laplace equation on [0,1]^d with u* = sum_k x_{2k-1} x_{2k} as Dirichlet data.
class PoissonCube final : public PdeProblemBase<PoissonCube> {
 public:
  explicit PoissonCube(std::size_t d) : d_(d) {
    require(d_ >= 2 && d_ % 2 == 0, ErrorCode::invalid_argument,
            "poisson_cube needs an even dimension >= 2");
  }
  std::string name() const override { return "poisson_cube"; }
  std::string description() const override {
    return "Laplace on [0,1]^d, u* = sum_k x_{2k-1} x_{2k}, Dirichlet data from u*";
  }
  std::size_t dim() const override { return d_; }
  std::vector<ClassSpec> class_specs() const override {
    return {{ClassKind::interior, 1, 800}, {ClassKind::boundary, 1, 200}};
  }
  NetworkHints network_hints() const override { return {d_}; }

  CollocationSet sample(std::span<const std::size_t> counts, std::uint64_t seed) const override {
    check_counts(*this, counts);
    std::mt19937_64 rng(seed);
    CollocationSet set;
    set.classes.push_back(make_class(ClassKind::interior, d_, counts[0]));
    fill_box(set.classes.back(), 0.0, 1.0, rng);
    set.classes.push_back(make_class(ClassKind::boundary, d_, counts[1]));
    fill_cube_boundary(set.classes.back(), rng);
    return set;
  }

  bool has_reference() const override { return true; }
  double reference(std::span<const double> x) const override {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); k += 2) s += x[k] * x[k + 1];
    return s;
  }
  Matrix evaluation_points(std::size_t count) const override {
    return halton_box(count, d_, 0.0, 1.0);
  }

  template <class W>
  void residual_impl(const Ansatz& u, std::span<const W> theta, const PointRef& p,
                     std::span<W> out) const {
    if (p.kind == ClassKind::interior) {
      W lap(0.0);
      for (std::size_t j = 0; j < d_; ++j)
        lap = lap + model::directional_jet<W>(u, theta, p.x, j).d2;
      out[0] = W(0.0) - lap;
    } else {
      out[0] = model::value_at<W>(u, theta, p.x) - W(reference(p.x));
    }
  }

 private:
  std::size_t d_;
};

// ---------------------------------------------------------------------------
// u_t - kappa Laplace_x u = 0 on [0,1] x [0,1]^d, kappa = 1/4, with
// u_ex = exp(-4 pi^2 kappa t) sum_i sin(2 pi x_i). Coordinate 0 is time. The
// boundary class covers the spatio-temporal boundary: the t = 0 slice and the
// 2d lateral faces, all of unit area.
class Heat final : public PdeProblemBase<Heat> {
 public:
  static constexpr double kappa = 0.25;

  explicit Heat(std::size_t d) : d_(d) {
    require(d_ >= 1, ErrorCode::invalid_argument, "heat needs a spatial dimension >= 1");
  }
  std::string name() const override { return "heat"; }
  std::string description() const override {
    return "heat equation on [0,1]x[0,1]^d, kappa = 1/4, u = exp(-pi^2 t) sum sin(2 pi x_i)";
  }
  std::size_t dim() const override { return d_ + 1; }
  std::vector<ClassSpec> class_specs() const override {
    return {{ClassKind::interior, 1, 400}, {ClassKind::boundary, 1, 100}};
  }
  NetworkHints network_hints() const override { return {d_ + 1}; }

  CollocationSet sample(std::span<const std::size_t> counts, std::uint64_t seed) const override {
    check_counts(*this, counts);
    std::mt19937_64 rng(seed);
    CollocationSet set;
    set.classes.push_back(make_class(ClassKind::interior, d_ + 1, counts[0]));
    fill_box(set.classes.back(), 0.0, 1.0, rng);
    auto boundary = make_class(ClassKind::boundary, d_ + 1, counts[1]);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> face(0, 2 * d_);
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      double* x = boundary.coords.data() + i * boundary.dim;
      for (std::size_t k = 0; k <= d_; ++k) x[k] = unit(rng);
      const std::size_t f = face(rng);
      if (f == 2 * d_) {
        x[0] = 0.0;
      } else {
        x[1 + f / 2] = (f % 2 == 0) ? 0.0 : 1.0;
      }
    }
    set.classes.push_back(std::move(boundary));
    return set;
  }

  bool has_reference() const override { return true; }
  double reference(std::span<const double> x) const override {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += std::sin(2.0 * kPi * x[i]);
    return std::exp(-4.0 * kPi * kPi * kappa * x[0]) * s;
  }
  Matrix evaluation_points(std::size_t count) const override {
    return halton_box(count, d_ + 1, 0.0, 1.0);
  }

  template <class W>
  void residual_impl(const Ansatz& u, std::span<const W> theta, const PointRef& p,
                     std::span<W> out) const {
    if (p.kind == ClassKind::interior) {
      const W u_t = model::directional_jet<W>(u, theta, p.x, 0).d1;
      W lap(0.0);
      for (std::size_t j = 1; j <= d_; ++j)
        lap = lap + model::directional_jet<W>(u, theta, p.x, j).d2;
      out[0] = u_t - lap * W(kappa);
    } else {
      out[0] = model::value_at<W>(u, theta, p.x) - W(reference(p.x));
    }
  }

 private:
  std::size_t d_;
};

// ---------------------------------------------------------------------------
// u_t - 1e-4 u_xx + 5u^3 - 5u = 0 on [0,1] x [-1,1], u(0,x) = x^2 cos(pi x).
// Periodicity is left to the input embedding, so only interior and initial
// residuals exist.
class AllenCahn final : public PdeProblemBase<AllenCahn> {
 public:
  static constexpr double diffusion = 1e-4;

  std::string name() const override { return "allen_cahn"; }
  std::string description() const override {
    return "Allen-Cahn u_t - 1e-4 u_xx + 5u^3 - 5u = 0, periodic in x, u0 = x^2 cos(pi x)";
  }
  std::size_t dim() const override { return 2; }
  std::vector<ClassSpec> class_specs() const override {
    return {{ClassKind::interior, 1, 1200}, {ClassKind::initial, 1, 150}};
  }
  NetworkHints network_hints() const override { return {3, model::Embedding::periodic}; }

  CollocationSet sample(std::span<const std::size_t> counts, std::uint64_t seed) const override {
    check_counts(*this, counts);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> t_dist(0.0, 1.0);
    std::uniform_real_distribution<double> x_dist(-1.0, 1.0);
    CollocationSet set;
    auto interior = make_class(ClassKind::interior, 2, counts[0]);
    for (std::size_t i = 0; i < interior.size(); ++i) {
      interior.coords[2 * i] = t_dist(rng);
      interior.coords[2 * i + 1] = x_dist(rng);
    }
    set.classes.push_back(std::move(interior));
    auto initial = make_class(ClassKind::initial, 2, counts[1]);
    for (std::size_t i = 0; i < initial.size(); ++i) {
      initial.coords[2 * i] = 0.0;
      initial.coords[2 * i + 1] = x_dist(rng);
    }
    set.classes.push_back(std::move(initial));
    return set;
  }

  bool has_reference() const override { return true; }
  bool reference_is_exact() const override { return false; }
  double reference(std::span<const double> x) const override {
    return AllenCahnReference::shared()(x[0], x[1]);
  }
  Matrix evaluation_points(std::size_t count) const override {
    Matrix pts = halton_box(count, 2, 0.0, 1.0);
    pts.col(1) = (pts.col(1).array() * 2.0 - 1.0).matrix();
    return pts;
  }

  template <class W>
  void residual_impl(const Ansatz& u, std::span<const W> theta, const PointRef& p,
                     std::span<W> out) const {
    if (p.kind == ClassKind::interior) {
      const auto jt = model::directional_jet<W>(u, theta, p.x, 0);
      const auto jx = model::directional_jet<W>(u, theta, p.x, 1);
      const W& v = jt.value;
      out[0] = jt.d1 - jx.d2 * W(diffusion) + (v * v * v) * W(5.0) - v * W(5.0);
    } else {
      const double x = p.x[1];
      out[0] = model::value_at<W>(u, theta, p.x) - W(x * x * std::cos(kPi * x));
    }
  }
};

// ---------------------------------------------------------------------------
// -Laplace(u) = f in the unit ball of R^d, u = 0 on the sphere, with the
// two-body solution u_ex = (1 - |x|^2) sum_i c_i [sin(x_i + cos x_{i+1}) + x_{i+1} cos x_i].
// The interior residual uses the STDE Laplacian over the point's coordinate
// subset (stored as aux payload, redrawn at every sampling).
class PoissonBall final : public PdeProblemBase<PoissonBall> {
 public:
  PoissonBall(std::size_t d, std::size_t k, std::uint64_t coefficient_seed) : d_(d), k_(k) {
    require(d_ >= 2, ErrorCode::invalid_argument, "poisson_ball needs dimension >= 2");
    require(k_ >= 1 && k_ <= d_, ErrorCode::invalid_argument,
            "poisson_ball STDE subset size must lie in [1, d]");
    std::mt19937_64 rng(coefficient_seed);
    std::normal_distribution<double> normal;
    coefficients_.resize(d_ - 1);
    for (double& c : coefficients_) c = normal(rng);
  }

  std::string name() const override { return "poisson_ball"; }
  std::string description() const override {
    return "Poisson in the unit d-ball with a two-body manufactured solution, STDE Laplacian";
  }
  std::size_t dim() const override { return d_; }
  std::vector<ClassSpec> class_specs() const override {
    return {{ClassKind::interior, 1, 100}};
  }
  NetworkHints network_hints() const override {
    return {d_, model::Embedding::identity, {model::TransformKind::dirichlet_ball}};
  }

  CollocationSet sample(std::span<const std::size_t> counts, std::uint64_t seed) const override {
    check_counts(*this, counts);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto interior = make_class(ClassKind::interior, d_, counts[0]);
    interior.aux_stride = k_;
    interior.aux.reserve(interior.size() * k_);
    for (std::size_t i = 0; i < interior.size(); ++i) {
      double* x = interior.coords.data() + i * d_;
      double norm2 = 0.0;
      for (std::size_t k = 0; k < d_; ++k) {
        x[k] = normal(rng);
        norm2 += x[k] * x[k];
      }
      const double radius = std::pow(unit(rng), 1.0 / static_cast<double>(d_));
      const double scale = radius / std::sqrt(norm2);
      for (std::size_t k = 0; k < d_; ++k) x[k] *= scale;
      const auto subset = draw_coordinate_subset(d_, k_, rng);
      interior.aux.insert(interior.aux.end(), subset.begin(), subset.end());
    }
    CollocationSet set;
    set.classes.push_back(std::move(interior));
    return set;
  }

  template <class X>
  X solution(std::span<const X> x) const {
    using std::cos;
    using std::sin;
    X r2(0.0);
    for (const X& xi : x) r2 = r2 + xi * xi;
    X s(0.0);
    for (std::size_t i = 0; i + 1 < d_; ++i)
      s = s + (sin(x[i] + cos(x[i + 1])) + x[i + 1] * cos(x[i])) * X(coefficients_[i]);
    return (X(1.0) - r2) * s;
  }

  bool has_reference() const override { return true; }
  double reference(std::span<const double> x) const override { return solution<double>(x); }

  // f = -Laplace(u_ex), exact via one input 2-jet per coordinate.
  double source(std::span<const double> x) const {
    std::vector<Jet2<double>> xj(d_);
    double lap = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      model::seed_input_jet<double>(x, j, xj);
      lap += solution<Jet2<double>>(xj).d2;
    }
    return -lap;
  }

  Matrix evaluation_points(std::size_t count) const override {
    // Halton in d+1 dimensions: d coordinates mapped to a Gaussian direction,
    // the last one to the radius.
    Matrix pts(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d_));
    for (std::size_t i = 0; i < count; ++i) {
      const auto h = halton_point(i + 1, d_ + 1);
      double norm2 = 0.0;
      std::vector<double> g(d_);
      for (std::size_t k = 0; k < d_; ++k) {
        const double q = std::clamp(h[k], 1e-12, 1.0 - 1e-12);
        g[k] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * q - 1.0);
        norm2 += g[k] * g[k];
      }
      const double radius = std::pow(std::max(h[d_], 1e-12), 1.0 / static_cast<double>(d_));
      for (std::size_t k = 0; k < d_; ++k)
        pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            g[k] * radius / std::sqrt(norm2);
    }
    return pts;
  }

  template <class W>
  void residual_impl(const Ansatz& u, std::span<const W> theta, const PointRef& p,
                     std::span<W> out) const {
    out[0] = W(0.0) - stde_estimate<W>(u, theta, p.x, p.aux) - W(source(p.x));
  }

 private:
  std::size_t d_;
  std::size_t k_;
  std::vector<double> coefficients_;
};

}  // namespace

double PdeProblem::reference(std::span<const double>) const {
  throw Error(ErrorCode::invalid_argument, name() + " has no reference solution");
}

CollocationSet PdeProblem::sample_default(std::uint64_t seed) const {
  std::vector<std::size_t> counts;
  for (const auto& s : class_specs()) counts.push_back(s.default_count);
  return sample(counts, seed);
}

std::unique_ptr<PdeProblem> make_problem(const ProblemOptions& options) {
  const std::string& n = options.name;
  if (n == "poisson2d") return std::make_unique<Poisson2d>();
  if (n == "poisson_cube" || n == "poisson10d")
    return std::make_unique<PoissonCube>(options.dim ? options.dim : 10);
  if (n == "heat" || n == "heat2d" || n == "heat10d") {
    std::size_t d = options.dim;
    if (d == 0) d = n == "heat10d" ? 10 : 2;
    return std::make_unique<Heat>(d);
  }
  if (n == "allen_cahn") return std::make_unique<AllenCahn>();
  if (n == "poisson_ball") {
    const std::size_t d = options.dim ? options.dim : 100;
    const std::size_t k = options.stde_k ? options.stde_k : std::min<std::size_t>(16, d);
    return std::make_unique<PoissonBall>(d, k, options.coefficient_seed);
  }
  throw Error(ErrorCode::config, "unknown problem '" + n + "'");
}

std::vector<ProblemInfo> list_problems() {
  std::vector<ProblemInfo> out;
  for (const char* name : {"poisson2d", "poisson_cube", "heat", "allen_cahn", "poisson_ball"}) {
    ProblemOptions o;
    o.name = name;
    if (o.name == "poisson_ball") o.dim = 4;
    out.push_back({name, make_problem(o)->description()});
  }
  return out;
}

double relative_l2_error(std::span<const double> predicted, std::span<const double> exact) {
  require(predicted.size() == exact.size(), ErrorCode::dimension_mismatch,
          "prediction and reference have different lengths");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (predicted[i] - exact[i]) * (predicted[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  require(den > 0.0, ErrorCode::invalid_argument, "reference has zero norm on the grid");
  return std::sqrt(num / den);
}

double relative_l2_error(const PdeProblem& problem, const Ansatz& u, const Vector& theta,
                         const Matrix& eval_points) {
  const auto count = static_cast<std::size_t>(eval_points.rows());
  const auto dim = static_cast<std::size_t>(eval_points.cols());
  std::vector<double> predicted(count), exact(count), x(dim);
  const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < dim; ++k)
      x[k] = eval_points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    predicted[i] = model::value_at<double>(u, th, x);
    exact[i] = problem.reference(x);
  }
  return relative_l2_error(predicted, exact);
}

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

std::vector<double> halton_point(std::size_t index, std::size_t dim) {
  static const std::vector<unsigned> primes = first_primes(1024);
  require(dim <= primes.size(), ErrorCode::invalid_argument, "Halton dimension too large");
  std::vector<double> out(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const double base = primes[k];
    double f = 1.0;
    double r = 0.0;
    std::size_t i = index;
    while (i > 0) {
      f /= base;
      r += f * static_cast<double>(i % primes[k]);
      i /= primes[k];
    }
    out[k] = r;
  }
  return out;
}

}  // namespace dngd::pde
