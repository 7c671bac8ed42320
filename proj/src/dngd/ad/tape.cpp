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

#include "dngd/ad/tape.hpp"

#include <cassert>

namespace dngd::ad {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* active_tape() noexcept { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

NodeIndex Tape::record_external(const ExternalOp* op, std::size_t count,
                                std::span<const double> data, std::span<const NodeIndex> indices) {
  assert(count > 0);
  External e{op, static_cast<NodeIndex>(statement_end_.size()), count, external_data_.size(),
             data.size(), external_indices_.size(), indices.size()};
  external_data_.insert(external_data_.end(), data.begin(), data.end());
  external_indices_.insert(external_indices_.end(), indices.begin(), indices.end());
  externals_.push_back(e);
  for (std::size_t k = 0; k < count; ++k) close_statement();
  return e.first;
}

void Tape::backward(std::span<double> adjoint) const {
  assert(adjoint.size() == statement_end_.size());
  const NodeIndex* op = operand_.data();
  const double* partial = partial_.data();
  std::size_t next_external = externals_.size();
  for (std::size_t s = statement_end_.size(); s-- > 0;) {
    if (next_external > 0 && static_cast<std::size_t>(externals_[next_external - 1].first) == s) {
      const External& e = externals_[--next_external];
      const std::span<const double> outputs(adjoint.data() + s, e.count);
      bool seeded = false;
      for (double a : outputs) seeded = seeded || a != 0.0;
      if (seeded)
        e.op->backward({external_data_.data() + e.data_begin, e.data_size},
                       {external_indices_.data() + e.index_begin, e.index_size}, outputs, adjoint);
      continue;
    }
    const double a = adjoint[s];
    if (a == 0.0) continue;
    const std::uint32_t begin = s == 0 ? 0u : statement_end_[s - 1];
    const std::uint32_t end = statement_end_[s];
    for (std::uint32_t k = begin; k < end; ++k) adjoint[op[k]] += partial[k] * a;
  }
}

Var dot(std::span<const Var> a, std::span<const Var> b, const Var& bias) {
  assert(a.size() == b.size());
  Tape* tape = active_tape();
  double value = bias.value();
  bool any_active = !bias.is_constant();
  for (std::size_t k = 0; k < a.size(); ++k) {
    value += a[k].value() * b[k].value();
    any_active = any_active || !a[k].is_constant() || !b[k].is_constant();
  }
  if (!any_active) return Var(value);
  tape->reserve_operands(2 * a.size() + 1);
  for (std::size_t k = 0; k < a.size(); ++k) {
    tape->push_unchecked(a[k].index(), b[k].value());
    tape->push_unchecked(b[k].index(), a[k].value());
  }
  tape->push_unchecked(bias.index(), 1.0);
  return {value, tape->close_statement()};
}

}  // namespace dngd::ad
