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
#include "dngd/error.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

namespace dngd::model {

// Fully connected tanh network; identity on the output layer.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layer_widths.front(); }
  std::size_t output_dim() const { return layer_widths.back(); }
  std::size_t num_params() const;
  void validate() const;
};

struct LayerShape {
  std::size_t rows = 0;  // fan_out
  std::size_t cols = 0;  // fan_in
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

// Flat parameter vector; weights are stored column-major per layer, followed
// by that layer's bias.
struct ParameterVector {
  Vector data;
  std::vector<LayerShape> layout;

  std::size_t size() const { return static_cast<std::size_t>(data.size()); }
};

std::vector<LayerShape> make_layout(const MlpSpec& spec);

struct LayerParams {
  Matrix weight;
  Vector bias;
};
std::vector<LayerParams> unflatten(const ParameterVector& params);
ParameterVector flatten(const std::vector<LayerParams>& layers);

// Glorot-uniform weights, zero biases; reproducible from spec.seed.
ParameterVector init_params(const MlpSpec& spec);

namespace detail {

// bias + sum_k w[k * stride] x[k].
template <class W, class X>
X affine(const W* w, std::size_t stride, std::size_t fan_in, const W& bias, const X* x) {
  if constexpr (std::is_same_v<W, ad::Var>) {
    thread_local std::vector<ad::Var> row;
    row.resize(fan_in);
    for (std::size_t k = 0; k < fan_in; ++k) row[k] = w[k * stride];
    if constexpr (std::is_same_v<X, ad::Var>) {
      return ad::dot(row, {x, fan_in}, bias);
    } else {
      thread_local std::vector<ad::Var> value, d1, d2;
      value.resize(fan_in);
      d1.resize(fan_in);
      d2.resize(fan_in);
      for (std::size_t k = 0; k < fan_in; ++k) {
        value[k] = x[k].value;
        d1[k] = x[k].d1;
        d2[k] = x[k].d2;
      }
      const ad::Var zero(0.0);
      return {ad::dot(row, value, bias), ad::dot(row, d1, zero), ad::dot(row, d2, zero)};
    }
  } else {
    X acc(bias);
    for (std::size_t k = 0; k < fan_in; ++k) acc = acc + w[k * stride] * x[k];
    return acc;
  }
}

}  // namespace detail

class Mlp final : private ad::ExternalOp {
 public:
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  const std::vector<LayerShape>& layout() const { return layout_; }
  std::size_t num_params() const { return num_params_; }
  std::size_t input_dim() const { return spec_.input_dim(); }
  std::size_t output_dim() const { return spec_.output_dim(); }

  // W is the parameter scalar, X the activation scalar (W or a jet over W).
  template <class W, class X>
  void forward(std::span<const W> theta, std::span<const X> input, std::span<X> output) const {
    require(theta.size() == num_params_, ErrorCode::dimension_mismatch,
            "parameter vector length does not match network");
    require(input.size() == input_dim(), ErrorCode::dimension_mismatch,
            "input dimension does not match network");
    require(output.size() == output_dim(), ErrorCode::dimension_mismatch,
            "output dimension does not match network");
    if constexpr (std::is_same_v<W, double> && std::is_same_v<X, double>) {
      forward_values(theta.data(), input.data(), output.data());
      return;
    } else if constexpr (std::is_same_v<W, double> && std::is_same_v<X, ad::Jet2<double>>) {
      forward_jets(theta.data(), input.data(), output.data());
      return;
    } else if constexpr (std::is_same_v<W, ad::Var> &&
                         (std::is_same_v<X, ad::Var> || std::is_same_v<X, ad::Jet2<ad::Var>>)) {
      if (forward_taped(theta, input.data(), output.data())) return;
    }
    std::vector<X> current(input.begin(), input.end());
    std::vector<X> next;
    for (std::size_t l = 0; l < layout_.size(); ++l) {
      const auto& shape = layout_[l];
      const bool hidden = l + 1 < layout_.size();
      next.resize(shape.rows);
      for (std::size_t i = 0; i < shape.rows; ++i) {
        X pre = detail::affine(theta.data() + shape.weight_offset + i, shape.rows, shape.cols,
                               theta[shape.bias_offset + i], current.data());
        if (hidden) {
          using std::tanh;
          next[i] = tanh(pre);
        } else {
          next[i] = pre;
        }
      }
      current.swap(next);
    }
    std::copy(current.begin(), current.end(), output.begin());
  }

  std::vector<double> forward(const Vector& theta, std::span<const double> x) const;

 private:
  // Dense matrix-vector kernels for the all-double cases.
  void forward_values(const double* theta, const double* input, double* output) const;
  void forward_jets(const double* theta, const ad::Jet2<double>* input, ad::Jet2<double>* output) const;

  // Records the whole pass as one external tape block. Returns false (and
  // records nothing) unless theta is a contiguous run of tape leaves.
  bool forward_taped(std::span<const ad::Var> theta, const ad::Var* input, ad::Var* output) const;
  bool forward_taped(std::span<const ad::Var> theta, const ad::Jet2<ad::Var>* input,
                     ad::Jet2<ad::Var>* output) const;
  template <int Components, class X>
  bool record_pass(std::span<const ad::Var> theta, const X* input, X* output) const;
  void backward(std::span<const double> data, std::span<const std::int32_t> indices,
                std::span<const double> outputs, std::span<double> adjoint) const override;

  MlpSpec spec_;
  std::vector<LayerShape> layout_;
  std::size_t num_params_ = 0;
};

}  // namespace dngd::model
