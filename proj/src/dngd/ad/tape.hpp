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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace dngd::ad {

using NodeIndex = std::int32_t;
inline constexpr NodeIndex kConstant = -1;

// A group of tape statements whose reverse sweep is done by a dense kernel
// instead of per-statement partials.
class ExternalOp {
 public:
  virtual ~ExternalOp() = default;
  // `outputs` holds the adjoints of the block's proxy statements; the kernel
  // adds its contributions into `adjoint`. `data` and `indices` are what was
  // handed to Tape::record_external.
  virtual void backward(std::span<const double> data, std::span<const std::int32_t> indices,
                        std::span<const double> outputs, std::span<double> adjoint) const = 0;
};

// Append-only record of scalar statements. Each statement stores the indices
// of the statements it depends on together with the local partial derivative
// with respect to each of them, so a backward sweep is a single pass of
// multiply-adds.
class Tape {
 public:
  Tape() { statement_end_.reserve(1 << 12); }

  void clear() {
    statement_end_.clear();
    operand_count_ = 0;
    externals_.clear();
    external_data_.clear();
    external_indices_.clear();
  }

  std::size_t size() const { return statement_end_.size(); }
  std::size_t operand_count() const { return operand_count_; }

  NodeIndex new_leaf() { return close_statement(); }

  NodeIndex record(NodeIndex a, double pa) {
    push(a, pa);
    return close_statement();
  }

  NodeIndex record(NodeIndex a, double pa, NodeIndex b, double pb) {
    push(a, pa);
    push(b, pb);
    return close_statement();
  }

  // Operands must already be pushed with push(); used by n-ary statements.
  void push(NodeIndex index, double partial) {
    if (index == kConstant) return;
    if (operand_count_ == operand_.size()) reserve_operands(1);
    push_unchecked(index, partial);
  }
  // Guarantees room for `extra` further operands.
  void reserve_operands(std::size_t extra) {
    const std::size_t need = operand_count_ + extra;
    if (need <= operand_.size()) return;
    const std::size_t grown = std::max(need, 2 * operand_.size() + 1024);
    operand_.resize(grown);
    partial_.resize(grown);
  }
  // push() without the capacity check; call reserve_operands() first.
  void push_unchecked(NodeIndex index, double partial) {
    operand_[operand_count_] = index;
    partial_[operand_count_] = partial;
    operand_count_ += index != kConstant;
  }
  NodeIndex close_statement() {
    statement_end_.push_back(static_cast<std::uint32_t>(operand_count_));
    return static_cast<NodeIndex>(statement_end_.size() - 1);
  }

  // Appends `count` operand-free proxy statements and returns the index of the
  // first. The sweep calls op->backward once all proxies have their adjoints.
  // `op` must outlive every backward() on this recording.
  NodeIndex record_external(const ExternalOp* op, std::size_t count, std::span<const double> data,
                            std::span<const NodeIndex> indices);

  // Reverse sweep. `adjoint` must have size() entries holding the seeds;
  // on return it holds d(seeded output)/d(statement) for every statement.
  void backward(std::span<double> adjoint) const;

 private:
  std::vector<std::uint32_t> statement_end_;
  // Sized by capacity; only the first operand_count_ entries are live.
  std::vector<NodeIndex> operand_;
  std::vector<double> partial_;
  std::size_t operand_count_ = 0;

  struct External {
    const ExternalOp* op;
    NodeIndex first;
    std::size_t count;
    std::size_t data_begin, data_size;
    std::size_t index_begin, index_size;
  };
  std::vector<External> externals_;
  std::vector<double> external_data_;
  std::vector<NodeIndex> external_indices_;
};

// The tape that newly created variables record onto. One per thread.
Tape* active_tape() noexcept;

// Installs a tape as the active one for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Reverse-mode scalar. Values built only from constants stay untaped.
class Var {
 public:
  constexpr Var() = default;
  constexpr Var(double v) : value_(v) {}  // NOLINT
  constexpr Var(double v, NodeIndex index) : value_(v), index_(index) {}

  static Var leaf(double v) { return {v, active_tape()->new_leaf()}; }

  constexpr double value() const { return value_; }
  constexpr NodeIndex index() const { return index_; }
  constexpr bool is_constant() const { return index_ == kConstant; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);

 private:
  double value_ = 0.0;
  NodeIndex index_ = kConstant;
};

namespace detail {
inline Var unary(double value, const Var& a, double pa) {
  if (a.is_constant()) return Var(value);
  return {value, active_tape()->record(a.index(), pa)};
}
inline Var binary(double value, const Var& a, double pa, const Var& b, double pb) {
  if (a.is_constant() && b.is_constant()) return Var(value);
  if (a.is_constant()) return {value, active_tape()->record(b.index(), pb)};
  if (b.is_constant()) return {value, active_tape()->record(a.index(), pa)};
  return {value, active_tape()->record(a.index(), pa, b.index(), pb)};
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  return detail::binary(a.value() + b.value(), a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::binary(a.value() - b.value(), a, 1.0, b, -1.0);
}
inline Var operator-(const Var& a) { return detail::unary(-a.value(), a, -1.0); }
inline Var operator*(const Var& a, const Var& b) {
  return detail::binary(a.value() * b.value(), a, b.value(), b, a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  const double q = a.value() / b.value();
  return detail::binary(q, a, 1.0 / b.value(), b, -q / b.value());
}
inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }

inline Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return detail::unary(t, a, 1.0 - t * t);
}
inline Var sin(const Var& a) { return detail::unary(std::sin(a.value()), a, std::cos(a.value())); }
inline Var cos(const Var& a) { return detail::unary(std::cos(a.value()), a, -std::sin(a.value())); }
inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return detail::unary(e, a, e);
}

inline double value_of(const Var& x) { return x.value(); }

// bias + sum_k a_k * b_k recorded as a single statement.
Var dot(std::span<const Var> a, std::span<const Var> b, const Var& bias);

}  // namespace dngd::ad
