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

#include <cmath>
#include <type_traits>

namespace dngd::ad {

// Truncated second-order Taylor polynomial along a single direction:
// value = f(x), d1 = f'(x)[e], d2 = f''(x)[e, e].
//
// T may itself be a Jet2 (nested jets) or a tape variable, so every
// operation below is written purely in terms of T arithmetic.
template <class T>
struct Jet2 {
  T value{};
  T d1{};
  T d2{};

  constexpr Jet2() = default;
  constexpr Jet2(T v) : value(v), d1(T(0.0)), d2(T(0.0)) {}  // NOLINT
  constexpr Jet2(T v, T first, T second) : value(v), d1(first), d2(second) {}

  template <class U>
    requires(std::is_arithmetic_v<U> && !std::is_same_v<T, double>)
  constexpr Jet2(U v) : Jet2(T(static_cast<double>(v))) {}  // NOLINT

  static constexpr Jet2 variable(T v, T direction) { return {v, direction, T(0.0)}; }

  Jet2& operator+=(const Jet2& o) { return *this = *this + o; }
  Jet2& operator-=(const Jet2& o) { return *this = *this - o; }
  Jet2& operator*=(const Jet2& o) { return *this = *this * o; }
};

template <class T>
struct is_jet : std::false_type {};
template <class T>
struct is_jet<Jet2<T>> : std::true_type {};
template <class T>
inline constexpr bool is_jet_v = is_jet<T>::value;

template <class T>
constexpr Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2};
}
template <class T>
constexpr Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2};
}
template <class T>
constexpr Jet2<T> operator-(const Jet2<T>& a) {
  return {-a.value, -a.d1, -a.d2};
}
template <class T>
constexpr Jet2<T> operator*(const Jet2<T>& f, const Jet2<T>& g) {
  return {f.value * g.value, f.d1 * g.value + f.value * g.d1,
          f.d2 * g.value + T(2.0) * (f.d1 * g.d1) + f.value * g.d2};
}
template <class T>
constexpr Jet2<T> operator/(const Jet2<T>& f, const Jet2<T>& g) {
  const T q = f.value / g.value;
  const T q1 = (f.d1 - q * g.d1) / g.value;
  const T q2 = (f.d2 - T(2.0) * (q1 * g.d1) - q * g.d2) / g.value;
  return {q, q1, q2};
}

// Mixed jet/scalar forms; the scalar is a constant of the inner type.
template <class T>
constexpr Jet2<T> operator*(const Jet2<T>& f, const T& s) {
  return {f.value * s, f.d1 * s, f.d2 * s};
}
template <class T>
constexpr Jet2<T> operator*(const T& s, const Jet2<T>& f) {
  return f * s;
}
template <class T>
constexpr Jet2<T> operator+(const Jet2<T>& f, const T& s) {
  return {f.value + s, f.d1, f.d2};
}
template <class T>
constexpr Jet2<T> operator+(const T& s, const Jet2<T>& f) {
  return f + s;
}
template <class T>
constexpr Jet2<T> operator-(const Jet2<T>& f, const T& s) {
  return {f.value - s, f.d1, f.d2};
}
template <class T>
constexpr Jet2<T> operator-(const T& s, const Jet2<T>& f) {
  return {s - f.value, -f.d1, -f.d2};
}

// Plain double constants for nested jets (Jet2<Jet2<double>> * 2.0 etc.).
template <class T>
  requires(!std::is_same_v<T, double>)
constexpr Jet2<T> operator*(const Jet2<T>& f, double s) {
  return f * T(s);
}
template <class T>
  requires(!std::is_same_v<T, double>)
constexpr Jet2<T> operator*(double s, const Jet2<T>& f) {
  return f * T(s);
}
template <class T>
  requires(!std::is_same_v<T, double>)
constexpr Jet2<T> operator+(const Jet2<T>& f, double s) {
  return f + T(s);
}
template <class T>
  requires(!std::is_same_v<T, double>)
constexpr Jet2<T> operator+(double s, const Jet2<T>& f) {
  return f + T(s);
}
template <class T>
  requires(!std::is_same_v<T, double>)
constexpr Jet2<T> operator-(const Jet2<T>& f, double s) {
  return f - T(s);
}
template <class T>
  requires(!std::is_same_v<T, double>)
constexpr Jet2<T> operator-(double s, const Jet2<T>& f) {
  return T(s) - f;
}

// Chain rule for a scalar function with derivatives (f0, f1, f2) at x.value.
template <class T>
constexpr Jet2<T> compose(const Jet2<T>& x, const T& f0, const T& f1, const T& f2) {
  return {f0, f1 * x.d1, f1 * x.d2 + f2 * (x.d1 * x.d1)};
}

template <class T>
Jet2<T> tanh(const Jet2<T>& x) {
  using std::tanh;
  const T t = tanh(x.value);
  const T s = T(1.0) - t * t;
  // d2 = (1 - t^2) x.d2 - 2 t (1 - t^2) x.d1^2
  return {t, s * x.d1, s * x.d2 - T(2.0) * (t * s) * (x.d1 * x.d1)};
}

template <class T>
Jet2<T> sin(const Jet2<T>& x) {
  using std::cos;
  using std::sin;
  const T s = sin(x.value);
  const T c = cos(x.value);
  return compose(x, s, c, -s);
}

template <class T>
Jet2<T> cos(const Jet2<T>& x) {
  using std::cos;
  using std::sin;
  const T s = sin(x.value);
  const T c = cos(x.value);
  return compose(x, c, -s, -c);
}

template <class T>
Jet2<T> exp(const Jet2<T>& x) {
  using std::exp;
  const T e = exp(x.value);
  return compose(x, e, e, e);
}

// Scalar helpers that work uniformly for double, jets and tape variables.
template <class T>
T square(const T& x) {
  return x * x;
}

inline double value_of(double x) { return x; }
template <class T>
auto value_of(const Jet2<T>& x) {
  return value_of(x.value);
}

}  // namespace dngd::ad
