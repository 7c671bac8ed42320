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
#include "dngd/model/ansatz.hpp"
#include "dngd/model/network.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dngd::pde {

using model::Ansatz;
using model::Jet2;
using model::ParamJet;
using model::Var;

struct ClassSpec {
  ClassKind kind;
  std::size_t output_dim = 1;
  std::size_t default_count = 0;
};

// Network settings a problem expects (embedding, hard constraints).
struct NetworkHints {
  std::size_t mlp_input_width = 0;
  model::Embedding embedding = model::Embedding::identity;
  model::OutputTransform transform{};
};

// A PDE with its residual classes. Residuals returned here are unscaled; the
// 1/sqrt(N) class weights live in the CollocationSet.
class PdeProblem {
 public:
  virtual ~PdeProblem() = default;

  virtual std::string name() const = 0;
  virtual std::string description() const = 0;
  // Raw coordinate dimension of a collocation point (time included).
  virtual std::size_t dim() const = 0;
  virtual std::vector<ClassSpec> class_specs() const = 0;
  virtual NetworkHints network_hints() const = 0;

  // One count per class, in class_specs() order.
  virtual CollocationSet sample(std::span<const std::size_t> counts, std::uint64_t seed) const = 0;

  // Closed-form solution or a numerical reference; used for error metrics.
  virtual bool has_reference() const { return false; }
  virtual double reference(std::span<const double> x) const;
  virtual bool reference_is_exact() const { return has_reference(); }

  // Deterministic quasi-uniform evaluation points (rows), 10^4 by default.
  virtual Matrix evaluation_points(std::size_t count = 10000) const = 0;

  virtual void residual(const Ansatz& u, std::span<const double> theta, const PointRef& p,
                        std::span<double> out) const = 0;
  virtual void residual(const Ansatz& u, std::span<const Var> theta, const PointRef& p,
                        std::span<Var> out) const = 0;
  virtual void residual(const Ansatz& u, std::span<const ParamJet> theta, const PointRef& p,
                        std::span<ParamJet> out) const = 0;

  CollocationSet sample_default(std::uint64_t seed) const;
};

// Implements the residual overloads from
//   template <class W> void residual_impl(const Ansatz&, std::span<const W>, const PointRef&, std::span<W>) const;
template <class Derived>
class PdeProblemBase : public PdeProblem {
 public:
  void residual(const Ansatz& u, std::span<const double> theta, const PointRef& p,
                std::span<double> out) const override {
    self().residual_impl(u, theta, p, out);
  }
  void residual(const Ansatz& u, std::span<const Var> theta, const PointRef& p,
                std::span<Var> out) const override {
    self().residual_impl(u, theta, p, out);
  }
  void residual(const Ansatz& u, std::span<const ParamJet> theta, const PointRef& p,
                std::span<ParamJet> out) const override {
    self().residual_impl(u, theta, p, out);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// Binds a problem to an ansatz, giving the residual map r(theta).
class PdeResidualModel : public ad::ResidualModel {
 public:
  PdeResidualModel(const PdeProblem& problem, const Ansatz& ansatz)
      : problem_(problem), ansatz_(ansatz) {}

  std::size_t num_params() const override { return ansatz_.num_params(); }

  void evaluate(std::span<const double> theta, const PointRef& p,
                std::span<double> out) const override {
    problem_.residual(ansatz_, theta, p, out);
  }
  void evaluate(std::span<const Var> theta, const PointRef& p, std::span<Var> out) const override {
    problem_.residual(ansatz_, theta, p, out);
  }
  void evaluate(std::span<const ParamJet> theta, const PointRef& p,
                std::span<ParamJet> out) const override {
    problem_.residual(ansatz_, theta, p, out);
  }

  const PdeProblem& problem() const { return problem_; }
  const Ansatz& ansatz() const { return ansatz_; }

 private:
  const PdeProblem& problem_;
  const Ansatz& ansatz_;
};

struct ProblemOptions {
  std::string name = "poisson2d";
  std::size_t dim = 0;            // 0 selects the problem default
  std::size_t stde_k = 0;         // coordinate subset size for STDE problems
  std::uint64_t coefficient_seed = 7;  // random coefficients of manufactured solutions

  bool operator==(const ProblemOptions&) const = default;
};

std::unique_ptr<PdeProblem> make_problem(const ProblemOptions& options);

struct ProblemInfo {
  std::string name;
  std::string description;
};
std::vector<ProblemInfo> list_problems();

// Relative L2 error of `predicted` against `exact` on matching samples.
double relative_l2_error(std::span<const double> predicted, std::span<const double> exact);

// Network prediction vs the problem reference on its evaluation points.
double relative_l2_error(const PdeProblem& problem, const Ansatz& u, const Vector& theta,
                         const Matrix& eval_points);

// ---- sampling / quasi-random helpers (shared with tests) -----------------

// Radical-inverse Halton point `index` (>= 1) in [0,1)^dim.
std::vector<double> halton_point(std::size_t index, std::size_t dim);
std::vector<unsigned> first_primes(std::size_t count);

}  // namespace dngd::pde
