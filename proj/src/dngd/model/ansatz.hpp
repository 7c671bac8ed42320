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
#include "dngd/ad/residual_model.hpp"
#include "dngd/ad/tape.hpp"

#include <span>

namespace dngd::model {

using ad::Jet2;
using ad::ParamJet;
using ad::Var;

// The trial function u_theta(x). Parameter scalars W range over double, tape
// variables and parameter-space jets; input scalars X are either W itself or
// an input-space jet over W.
class Ansatz {
 public:
  virtual ~Ansatz() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual std::size_t num_params() const = 0;

#define DNGD_ANSATZ_SIGNATURE(W, X) \
  virtual void evaluate(std::span<const W> theta, std::span<const X> x, std::span<X> out) const = 0;
  DNGD_ANSATZ_SIGNATURE(double, double)
  DNGD_ANSATZ_SIGNATURE(double, Jet2<double>)
  DNGD_ANSATZ_SIGNATURE(Var, Var)
  DNGD_ANSATZ_SIGNATURE(Var, Jet2<Var>)
  DNGD_ANSATZ_SIGNATURE(ParamJet, ParamJet)
  DNGD_ANSATZ_SIGNATURE(ParamJet, Jet2<ParamJet>)
#undef DNGD_ANSATZ_SIGNATURE
};

// Implements every overload from
//   template <class W, class X> void apply(std::span<const W>, std::span<const X>, std::span<X>) const;
template <class Derived>
class AnsatzBase : public Ansatz {
 public:
#define DNGD_ANSATZ_FORWARD(W, X)                                                              \
  void evaluate(std::span<const W> theta, std::span<const X> x, std::span<X> out) const override { \
    static_cast<const Derived&>(*this).template apply<W, X>(theta, x, out);                    \
  }
  DNGD_ANSATZ_FORWARD(double, double)
  DNGD_ANSATZ_FORWARD(double, Jet2<double>)
  DNGD_ANSATZ_FORWARD(Var, Var)
  DNGD_ANSATZ_FORWARD(Var, Jet2<Var>)
  DNGD_ANSATZ_FORWARD(ParamJet, ParamJet)
  DNGD_ANSATZ_FORWARD(ParamJet, Jet2<ParamJet>)
#undef DNGD_ANSATZ_FORWARD
};

// Lifts a plain point to input jets along coordinate `direction`.
template <class W>
void seed_input_jet(std::span<const double> x, std::size_t direction, std::span<Jet2<W>> out) {
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = Jet2<W>(W(x[i]), W(i == direction ? 1.0 : 0.0), W(0.0));
}

// (u, du/dx_j, d2u/dx_j2) of output component 0 as a W-valued jet.
template <class W>
Jet2<W> directional_jet(const Ansatz& ansatz, std::span<const W> theta, std::span<const double> x,
                        std::size_t direction) {
  thread_local std::vector<Jet2<W>> xin, out;
  xin.resize(x.size());
  out.resize(ansatz.output_dim());
  seed_input_jet<W>(x, direction, xin);
  ansatz.evaluate(theta, std::span<const Jet2<W>>(xin), std::span<Jet2<W>>(out));
  return out[0];
}

// Output component 0 at a plain point.
template <class W>
W value_at(const Ansatz& ansatz, std::span<const W> theta, std::span<const double> x) {
  thread_local std::vector<W> xin, out;
  xin.resize(x.size());
  out.resize(ansatz.output_dim());
  for (std::size_t i = 0; i < x.size(); ++i) xin[i] = W(x[i]);
  ansatz.evaluate(theta, std::span<const W>(xin), std::span<W>(out));
  return out[0];
}

}  // namespace dngd::model
