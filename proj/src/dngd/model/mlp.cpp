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

#include "dngd/model/mlp.hpp"

#include <cmath>
#include <random>

namespace dngd::model {

std::size_t MlpSpec::num_params() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < layer_widths.size(); ++k)
    n += (layer_widths[k] + 1) * layer_widths[k + 1];
  return n;
}

void MlpSpec::validate() const {
  require(!layer_widths.empty(), ErrorCode::invalid_argument, "layer list is empty");
  require(layer_widths.size() >= 2, ErrorCode::invalid_argument,
          "layer list needs at least an input and an output width");
  for (std::size_t w : layer_widths)
    require(w >= 1, ErrorCode::invalid_argument, "layer widths must be positive");
}

std::vector<LayerShape> make_layout(const MlpSpec& spec) {
  spec.validate();
  std::vector<LayerShape> layout;
  std::size_t offset = 0;
  for (std::size_t k = 0; k + 1 < spec.layer_widths.size(); ++k) {
    LayerShape s;
    s.cols = spec.layer_widths[k];
    s.rows = spec.layer_widths[k + 1];
    s.weight_offset = offset;
    s.bias_offset = offset + s.rows * s.cols;
    offset = s.bias_offset + s.rows;
    layout.push_back(s);
  }
  return layout;
}

std::vector<LayerParams> unflatten(const ParameterVector& params) {
  std::vector<LayerParams> layers;
  for (const auto& s : params.layout) {
    LayerParams lp;
    lp.weight = Eigen::Map<const Matrix>(params.data.data() + s.weight_offset, static_cast<Eigen::Index>(s.rows),
        static_cast<Eigen::Index>(s.cols));
    lp.bias = params.data.segment(static_cast<Eigen::Index>(s.bias_offset),
                                  static_cast<Eigen::Index>(s.rows));
    layers.push_back(std::move(lp));
  }
  return layers;
}

ParameterVector flatten(const std::vector<LayerParams>& layers) {
  ParameterVector out;
  std::size_t offset = 0;
  for (const auto& lp : layers) {
    LayerShape s;
    s.rows = static_cast<std::size_t>(lp.weight.rows());
    s.cols = static_cast<std::size_t>(lp.weight.cols());
    require(static_cast<std::size_t>(lp.bias.size()) == s.rows, ErrorCode::dimension_mismatch,
            "bias length does not match weight rows");
    s.weight_offset = offset;
    s.bias_offset = offset + s.rows * s.cols;
    offset = s.bias_offset + s.rows;
    out.layout.push_back(s);
  }
  out.data.resize(static_cast<Eigen::Index>(offset));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& s = out.layout[l];
    Eigen::Map<Matrix>(out.data.data() + s.weight_offset, static_cast<Eigen::Index>(s.rows),
        static_cast<Eigen::Index>(s.cols)) = layers[l].weight;
    out.data.segment(static_cast<Eigen::Index>(s.bias_offset), static_cast<Eigen::Index>(s.rows)) =
        layers[l].bias;
  }
  return out;
}

ParameterVector init_params(const MlpSpec& spec) {
  ParameterVector params;
  params.layout = make_layout(spec);
  params.data = Vector::Zero(static_cast<Eigen::Index>(spec.num_params()));
  std::mt19937_64 rng(spec.seed);
  for (const auto& s : params.layout) {
    const double a = std::sqrt(6.0 / static_cast<double>(s.cols + s.rows));
    std::uniform_real_distribution<double> dist(-a, a);
    for (std::size_t k = 0; k < s.rows * s.cols; ++k)
      params.data[static_cast<Eigen::Index>(s.weight_offset + k)] = dist(rng);
  }
  return params;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  layout_ = make_layout(spec_);
  num_params_ = spec_.num_params();
}

namespace {

Eigen::Map<const Matrix> weight_map(const double* theta, const LayerShape& shape) {
  return {theta + shape.weight_offset, static_cast<Eigen::Index>(shape.rows),
          static_cast<Eigen::Index>(shape.cols)};
}

Eigen::Map<const Vector> bias_map(const double* theta, const LayerShape& shape) {
  return {theta + shape.bias_offset, static_cast<Eigen::Index>(shape.rows)};
}

// tanh through the vectorized exp: sign(x) (1 - 2 / (exp(2|x|) + 1)).
// Absolute error stays at the rounding level, which is all the plain paths need.
template <class A>
void tanh_inplace(A&& x) {
  thread_local Eigen::ArrayXd e;
  e = (-2.0 * x.abs()).exp();
  x = x.sign() * (1.0 - e) / (1.0 + e);
}

}  // namespace

void Mlp::forward_values(const double* theta, const double* input, double* output) const {
  thread_local Vector current, next;
  current = Eigen::Map<const Vector>(input, static_cast<Eigen::Index>(input_dim()));
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& shape = layout_[l];
    next.noalias() = weight_map(theta, shape).lazyProduct(current);
    next += bias_map(theta, shape);
    if (l + 1 < layout_.size()) tanh_inplace(next.array());
    current.swap(next);
  }
  std::copy(current.data(), current.data() + current.size(), output);
}

void Mlp::forward_jets(const double* theta, const ad::Jet2<double>* input,
                       ad::Jet2<double>* output) const {
  const auto in = static_cast<Eigen::Index>(input_dim());
  bool seeded = false;
  for (Eigen::Index i = 0; i < in; ++i) seeded = seeded || input[i].d1 != 0.0 || input[i].d2 != 0.0;
  if (!seeded) {
    thread_local std::vector<double> values, out;
    values.resize(static_cast<std::size_t>(in));
    out.resize(output_dim());
    for (Eigen::Index i = 0; i < in; ++i) values[static_cast<std::size_t>(i)] = input[i].value;
    forward_values(theta, values.data(), out.data());
    for (std::size_t k = 0; k < out.size(); ++k) output[k] = ad::Jet2<double>(out[k]);
    return;
  }
  // Columns hold (value, d1, d2) of every unit.
  thread_local Matrix current, next;
  current.resize(in, 3);
  for (Eigen::Index i = 0; i < in; ++i) {
    current(i, 0) = input[i].value;
    current(i, 1) = input[i].d1;
    current(i, 2) = input[i].d2;
  }
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& shape = layout_[l];
    next.noalias() = weight_map(theta, shape).lazyProduct(current);
    next.col(0) += bias_map(theta, shape);
    if (l + 1 < layout_.size()) {
      thread_local Eigen::ArrayXd t, s;
      t = next.col(0).array();
      tanh_inplace(t);
      s = 1.0 - t.square();
      next.col(2).array() = s * next.col(2).array() - 2.0 * t * s * next.col(1).array().square();
      next.col(1).array() *= s;
      next.col(0) = t.matrix();
    }
    current.swap(next);
  }
  for (Eigen::Index k = 0; k < current.rows(); ++k)
    output[k] = ad::Jet2<double>(current(k, 0), current(k, 1), current(k, 2));
}

// Taped pass. Block data: theta values, the input columns, then Z and H
// (pre- and post-activation, one column per jet component) of every hidden
// layer. Block indices: the first theta leaf, then one index per input
// component. Proxy k * C + c carries component c of output k.

namespace {

using ColMap = Eigen::Map<Matrix>;
using ConstColMap = Eigen::Map<const Matrix>;

double component(const ad::Var& x, int) { return x.value(); }
double component(const ad::Jet2<ad::Var>& x, int c) {
  return c == 0 ? x.value.value() : c == 1 ? x.d1.value() : x.d2.value();
}
ad::NodeIndex component_index(const ad::Var& x, int) { return x.index(); }
ad::NodeIndex component_index(const ad::Jet2<ad::Var>& x, int c) {
  return c == 0 ? x.value.index() : c == 1 ? x.d1.index() : x.d2.index();
}
void assign_output(ad::Var& out, const double* values, ad::NodeIndex first, std::size_t) {
  out = ad::Var(values[0], first);
}
void assign_output(ad::Jet2<ad::Var>& out, const double* values, ad::NodeIndex first,
                   std::size_t stride) {
  out = ad::Jet2<ad::Var>(ad::Var(values[0], first), ad::Var(values[stride], first + 1),
                          ad::Var(values[2 * stride], first + 2));
}

}  // namespace

template <int C, class X>
bool Mlp::record_pass(std::span<const ad::Var> theta, const X* input, X* output) const {
  ad::Tape* tape = ad::active_tape();
  const ad::NodeIndex base = theta.empty() ? ad::kConstant : theta[0].index();
  if (tape == nullptr || base == ad::kConstant) return false;
  for (std::size_t k = 0; k < theta.size(); ++k)
    if (theta[k].index() != base + static_cast<ad::NodeIndex>(k)) return false;

  const auto in = static_cast<Eigen::Index>(input_dim());
  std::size_t size = num_params_ + static_cast<std::size_t>(in) * C;
  for (std::size_t l = 0; l + 1 < layout_.size(); ++l) size += 2 * layout_[l].rows * C;
  thread_local std::vector<double> data;
  thread_local std::vector<ad::NodeIndex> indices;
  data.resize(size);
  indices.assign(1 + static_cast<std::size_t>(in) * C, base);
  for (std::size_t k = 0; k < num_params_; ++k) data[k] = theta[k].value();
  const double* w = data.data();

  double* cursor = data.data() + num_params_;
  ColMap h_in(cursor, in, C);
  for (Eigen::Index i = 0; i < in; ++i)
    for (int c = 0; c < C; ++c) {
      h_in(i, c) = component(input[i], c);
      indices[1 + static_cast<std::size_t>(c * in + i)] = component_index(input[i], c);
    }
  const double* previous = cursor;
  cursor += in * C;
  auto prev_rows = in;

  thread_local Matrix out;
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& shape = layout_[l];
    const auto rows = static_cast<Eigen::Index>(shape.rows);
    const ConstColMap h_prev(previous, prev_rows, C);
    if (l + 1 == layout_.size()) {
      out.noalias() = weight_map(w, shape).lazyProduct(h_prev);
      out.col(0) += bias_map(w, shape);
      break;
    }
    ColMap z(cursor, rows, C);
    ColMap h(cursor + rows * C, rows, C);
    z.noalias() = weight_map(w, shape).lazyProduct(h_prev);
    z.col(0) += bias_map(w, shape);
    h.col(0) = z.col(0);
    tanh_inplace(h.col(0).array());
    if constexpr (C == 3) {
      thread_local Eigen::ArrayXd t, s;
      t = h.col(0).array();
      s = 1.0 - t.square();
      h.col(1).array() = s * z.col(1).array();
      h.col(2).array() = s * z.col(2).array() - 2.0 * t * s * z.col(1).array().square();
    }
    previous = h.data();
    prev_rows = rows;
    cursor += 2 * rows * C;
  }

  const auto n_out = static_cast<std::size_t>(out.rows());
  const ad::NodeIndex first = tape->record_external(this, n_out * C, data, indices);
  for (std::size_t k = 0; k < n_out; ++k)
    assign_output(output[k], out.data() + k, first + static_cast<ad::NodeIndex>(k * C), n_out);
  return true;
}

bool Mlp::forward_taped(std::span<const ad::Var> theta, const ad::Var* input,
                        ad::Var* output) const {
  return record_pass<1>(theta, input, output);
}

bool Mlp::forward_taped(std::span<const ad::Var> theta, const ad::Jet2<ad::Var>* input,
                        ad::Jet2<ad::Var>* output) const {
  const std::size_t in = input_dim();
  bool seeded = false;
  for (std::size_t i = 0; i < in; ++i)
    seeded = seeded || !input[i].d1.is_constant() || !input[i].d2.is_constant() ||
             input[i].d1.value() != 0.0 || input[i].d2.value() != 0.0;
  if (seeded) return record_pass<3>(theta, input, output);
  thread_local std::vector<ad::Var> values, out;
  values.resize(in);
  out.resize(output_dim());
  for (std::size_t i = 0; i < in; ++i) values[i] = input[i].value;
  if (!record_pass<1>(theta, values.data(), out.data())) return false;
  for (std::size_t k = 0; k < out.size(); ++k) output[k] = ad::Jet2<ad::Var>(out[k]);
  return true;
}

void Mlp::backward(std::span<const double> data, std::span<const std::int32_t> indices,
                   std::span<const double> outputs, std::span<double> adjoint) const {
  const auto in = static_cast<Eigen::Index>(input_dim());
  const auto C = static_cast<Eigen::Index>((indices.size() - 1) / static_cast<std::size_t>(in));
  double* grad = adjoint.data() + indices[0];
  const double* w = data.data();

  // Offsets of every hidden layer's Z block; the input block comes first.
  thread_local std::vector<const double*> z_blocks;
  z_blocks.clear();
  const double* input_block = data.data() + num_params_;
  const double* cursor = input_block + in * C;
  for (std::size_t l = 0; l + 1 < layout_.size(); ++l) {
    z_blocks.push_back(cursor);
    cursor += 2 * static_cast<Eigen::Index>(layout_[l].rows) * C;
  }

  thread_local Matrix z_bar, h_bar;
  const auto n_out = static_cast<Eigen::Index>(output_dim());
  z_bar.resize(n_out, C);
  for (Eigen::Index k = 0; k < n_out; ++k)
    for (Eigen::Index c = 0; c < C; ++c) z_bar(k, c) = outputs[static_cast<std::size_t>(k * C + c)];

  for (std::size_t l = layout_.size(); l-- > 0;) {
    const auto& shape = layout_[l];
    const auto rows = static_cast<Eigen::Index>(shape.rows);
    const auto cols = static_cast<Eigen::Index>(shape.cols);
    const double* h_prev_data = l == 0 ? input_block : z_blocks[l - 1] + cols * C;
    const ConstColMap h_prev(h_prev_data, cols, C);
    Eigen::Map<Matrix> w_grad(grad + shape.weight_offset, rows, cols);
    w_grad.noalias() += z_bar.lazyProduct(h_prev.transpose());
    Eigen::Map<Vector>(grad + shape.bias_offset, rows) += z_bar.col(0);

    h_bar.noalias() = weight_map(w, shape).transpose().lazyProduct(z_bar);
    if (l == 0) {
      for (Eigen::Index c = 0; c < C; ++c)
        for (Eigen::Index i = 0; i < in; ++i) {
          const ad::NodeIndex idx = indices[1 + static_cast<std::size_t>(c * in + i)];
          if (idx != ad::kConstant) adjoint[static_cast<std::size_t>(idx)] += h_bar(i, c);
        }
      break;
    }
    const ConstColMap z(z_blocks[l - 1], cols, C);
    const auto t = h_prev.col(0).array();
    const Eigen::ArrayXd s = 1.0 - t.square();
    z_bar.resize(cols, C);
    if (C == 1) {
      z_bar.col(0).array() = s * h_bar.col(0).array();
    } else {
      const auto z1 = z.col(1).array();
      const auto z2 = z.col(2).array();
      const auto b0 = h_bar.col(0).array();
      const auto b1 = h_bar.col(1).array();
      const auto b2 = h_bar.col(2).array();
      z_bar.col(0).array() =
          s * (b0 - 2.0 * t * b1 * z1 - 2.0 * b2 * (t * z2 + z1.square() * (s - 2.0 * t.square())));
      z_bar.col(1).array() = s * b1 - 4.0 * b2 * t * s * z1;
      z_bar.col(2).array() = s * b2;
    }
  }
}

std::vector<double> Mlp::forward(const Vector& theta, std::span<const double> x) const {
  std::vector<double> out(output_dim());
  forward<double, double>({theta.data(), static_cast<std::size_t>(theta.size())}, x, out);
  return out;
}

}  // namespace dngd::model
