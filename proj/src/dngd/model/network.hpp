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

#include "dngd/model/ansatz.hpp"
#include "dngd/model/mlp.hpp"

#include <numbers>
#include <string>
#include <vector>

namespace dngd::model {

// How raw coordinates are fed to the MLP.
//   identity: as is.
//   periodic: (t, x) -> (t, sin(pi x), cos(pi x)), period 2 in x.
enum class Embedding { identity, periodic };

// Hard-constraint transforms applied to the MLP output phi.
//   dirichlet_ball: u = (1 - |x|^2) phi(x), zero on the unit sphere.
//   ic_shift:       u = phi(t, x) - phi(0, x) + q0(x), coordinate 0 is time.
enum class TransformKind { identity, dirichlet_ball, ic_shift };

// Initial profiles q0 available to ic_shift (x excludes the time coordinate).
//   heat_sine_sum: sum_i sin(2 pi x_i)
//   allen_cahn:    x^2 cos(pi x)
enum class InitialProfile { none, heat_sine_sum, allen_cahn };

struct OutputTransform {
  TransformKind kind = TransformKind::identity;
  InitialProfile profile = InitialProfile::none;
};

const char* to_string(Embedding e) noexcept;
const char* to_string(TransformKind k) noexcept;
const char* to_string(InitialProfile p) noexcept;
Embedding embedding_from_string(const std::string& s);
TransformKind transform_from_string(const std::string& s);
InitialProfile profile_from_string(const std::string& s);

template <class X>
X initial_profile(InitialProfile profile, std::span<const X> x) {
  using std::cos;
  using std::sin;
  constexpr double pi = std::numbers::pi;
  switch (profile) {
    case InitialProfile::heat_sine_sum: {
      X s(0.0);
      for (const X& xi : x) s = s + sin(xi * (2.0 * pi));
      return s;
    }
    case InitialProfile::allen_cahn:
      return x[0] * x[0] * cos(x[0] * pi);
    case InitialProfile::none:
      break;
  }
  return X(0.0);
}

class Network : public AnsatzBase<Network> {
 public:
  Network(MlpSpec spec, Embedding embedding = Embedding::identity,
          OutputTransform transform = {});

  // Raw coordinate dimension; the MLP input width follows from the embedding.
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t output_dim() const override { return mlp_.output_dim(); }
  std::size_t num_params() const override { return mlp_.num_params(); }

  const Mlp& mlp() const { return mlp_; }
  Embedding embedding() const { return embedding_; }
  const OutputTransform& transform() const { return transform_; }

  template <class W, class X>
  void apply(std::span<const W> theta, std::span<const X> x, std::span<X> out) const {
    require(x.size() == input_dim_, ErrorCode::dimension_mismatch,
            "point dimension does not match network input");
    switch (transform_.kind) {
      case TransformKind::identity:
        phi<W, X>(theta, x, out);
        return;
      case TransformKind::dirichlet_ball: {
        phi<W, X>(theta, x, out);
        X r2(0.0);
        for (const X& xi : x) r2 = r2 + xi * xi;
        const X factor = X(1.0) - r2;
        for (X& o : out) o = factor * o;
        return;
      }
      case TransformKind::ic_shift: {
        phi<W, X>(theta, x, out);
        std::vector<X> x0(x.begin(), x.end());
        x0[0] = X(0.0);
        std::vector<X> at_zero(out.size());
        phi<W, X>(theta, x0, at_zero);
        const X q0 = initial_profile<X>(transform_.profile, x.subspan(1));
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = out[k] - at_zero[k] + q0;
        return;
      }
    }
  }

  // Plain forward pass.
  std::vector<double> forward(const Vector& theta, std::span<const double> x) const;

 private:
  template <class W, class X>
  void phi(std::span<const W> theta, std::span<const X> x, std::span<X> out) const {
    if (embedding_ == Embedding::identity) {
      mlp_.forward<W, X>(theta, x, out);
      return;
    }
    using std::cos;
    using std::sin;
    const X scaled = x[1] * std::numbers::pi;
    const X features[3] = {x[0], sin(scaled), cos(scaled)};
    mlp_.forward<W, X>(theta, features, out);
  }

  Mlp mlp_;
  Embedding embedding_;
  OutputTransform transform_;
  std::size_t input_dim_;
};

// (u, d_j u, d_jj u) at x for coordinate direction j (output component
// `component`). Throws when j is out of range.
Jet2<double> input_jet(const Network& network, const Vector& theta, std::span<const double> x,
                       std::size_t direction, std::size_t component = 0);

}  // namespace dngd::model
