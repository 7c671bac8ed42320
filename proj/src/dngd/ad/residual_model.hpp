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

#include "dngd/ad/jet.hpp"
#include "dngd/ad/tape.hpp"
#include "dngd/collocation.hpp"

#include <span>

namespace dngd::ad {

using ParamJet = Jet2<double>;

// A residual map r(theta) evaluated point by point. Implementations provide
// the unscaled residual of one collocation point; class weights are applied
// by the drivers in derivatives.hpp. The three overloads correspond to plain
// evaluation, reverse mode (tape) and forward jets in parameter space.
class ResidualModel {
 public:
  virtual ~ResidualModel() = default;

  virtual std::size_t num_params() const = 0;

  virtual void evaluate(std::span<const double> theta, const PointRef& point,
                        std::span<double> out) const = 0;
  virtual void evaluate(std::span<const Var> theta, const PointRef& point,
                        std::span<Var> out) const = 0;
  virtual void evaluate(std::span<const ParamJet> theta, const PointRef& point,
                        std::span<ParamJet> out) const = 0;
};

// Implements the three overloads from a single member template
//   template <class W> void residual(std::span<const W>, const PointRef&, std::span<W>) const;
template <class Derived>
class ResidualModelBase : public ResidualModel {
 public:
  void evaluate(std::span<const double> theta, const PointRef& point,
                std::span<double> out) const override {
    self().residual(theta, point, out);
  }
  void evaluate(std::span<const Var> theta, const PointRef& point,
                std::span<Var> out) const override {
    self().residual(theta, point, out);
  }
  void evaluate(std::span<const ParamJet> theta, const PointRef& point,
                std::span<ParamJet> out) const override {
    self().residual(theta, point, out);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

}  // namespace dngd::ad
