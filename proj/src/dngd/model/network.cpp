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

#include "dngd/model/network.hpp"

namespace dngd::model {

const char* to_string(Embedding e) noexcept {
  return e == Embedding::periodic ? "periodic" : "identity";
}

const char* to_string(TransformKind k) noexcept {
  switch (k) {
    case TransformKind::identity: return "identity";
    case TransformKind::dirichlet_ball: return "dirichlet_ball";
    case TransformKind::ic_shift: return "ic_shift";
  }
  return "identity";
}

const char* to_string(InitialProfile p) noexcept {
  switch (p) {
    case InitialProfile::none: return "none";
    case InitialProfile::heat_sine_sum: return "heat_sine_sum";
    case InitialProfile::allen_cahn: return "allen_cahn";
  }
  return "none";
}

Embedding embedding_from_string(const std::string& s) {
  if (s == "identity") return Embedding::identity;
  if (s == "periodic") return Embedding::periodic;
  throw Error(ErrorCode::config, "unknown embedding '" + s + "'");
}

TransformKind transform_from_string(const std::string& s) {
  if (s == "identity") return TransformKind::identity;
  if (s == "dirichlet_ball") return TransformKind::dirichlet_ball;
  if (s == "ic_shift") return TransformKind::ic_shift;
  throw Error(ErrorCode::config, "unknown output transform '" + s + "'");
}

InitialProfile profile_from_string(const std::string& s) {
  if (s == "none") return InitialProfile::none;
  if (s == "heat_sine_sum") return InitialProfile::heat_sine_sum;
  if (s == "allen_cahn") return InitialProfile::allen_cahn;
  throw Error(ErrorCode::config, "unknown initial profile '" + s + "'");
}

Network::Network(MlpSpec spec, Embedding embedding, OutputTransform transform)
    : mlp_(std::move(spec)), embedding_(embedding), transform_(transform) {
  if (embedding_ == Embedding::periodic) {
    require(mlp_.input_dim() == 3, ErrorCode::invalid_argument,
            "periodic embedding needs an MLP input width of 3");
    input_dim_ = 2;
  } else {
    input_dim_ = mlp_.input_dim();
  }
  if (transform_.kind == TransformKind::ic_shift) {
    require(input_dim_ >= 2, ErrorCode::invalid_argument,
            "ic_shift needs a time coordinate and at least one space coordinate");
    require(transform_.profile != InitialProfile::none, ErrorCode::invalid_argument,
            "ic_shift needs an initial profile");
  }
}

std::vector<double> Network::forward(const Vector& theta, std::span<const double> x) const {
  std::vector<double> out(output_dim());
  apply<double, double>({theta.data(), static_cast<std::size_t>(theta.size())}, x, out);
  return out;
}

Jet2<double> input_jet(const Network& network, const Vector& theta, std::span<const double> x,
                       std::size_t direction, std::size_t component) {
  require(direction < network.input_dim(), ErrorCode::invalid_argument,
          "jet direction " + std::to_string(direction) + " out of range for input dimension " +
              std::to_string(network.input_dim()));
  require(component < network.output_dim(), ErrorCode::invalid_argument,
          "output component out of range");
  std::vector<Jet2<double>> xin(x.size()), out(network.output_dim());
  seed_input_jet<double>(x, direction, xin);
  network.apply<double, Jet2<double>>({theta.data(), static_cast<std::size_t>(theta.size())},
                                      xin, out);
  return out[component];
}

}  // namespace dngd::model
