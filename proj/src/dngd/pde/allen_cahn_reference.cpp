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

#include "dngd/pde/allen_cahn_reference.hpp"

#include "dngd/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace dngd::pde {

namespace {

// Exact flow of u' = 5u - 5u^3 over time h.
double reaction_flow(double u, double h) {
  const double e = std::exp(10.0 * h);
  return u * std::exp(5.0 * h) / std::sqrt(1.0 + u * u * (e - 1.0));
}

}  // namespace

AllenCahnReference::AllenCahnReference() : AllenCahnReference(Settings{}) {}

AllenCahnReference::AllenCahnReference(const Settings& settings) : settings_(settings) {
  const std::size_t n = settings_.grid;
  require(n >= 8 && (n & (n - 1)) == 0, ErrorCode::invalid_argument,
          "reference grid must be a power of two");
  const double pi = std::numbers::pi;
  const auto steps_per_snapshot = static_cast<std::size_t>(
      std::llround(1.0 / (static_cast<double>(settings_.snapshots) * settings_.dt)));
  require(steps_per_snapshot >= 1, ErrorCode::invalid_argument, "reference time step too large");
  const double dt = 1.0 / static_cast<double>(settings_.snapshots * steps_per_snapshot);

  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n);
    u[j] = x * x * std::cos(pi * x);
  }

  // Period 2: wavenumber of mode j is pi * j (signed).
  std::vector<double> decay(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = pi * (j <= n / 2 ? static_cast<double>(j)
                                      : static_cast<double>(j) - static_cast<double>(n));
    decay[j] = std::exp(-settings_.diffusion * k * k * dt);
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  snapshots_.reserve(settings_.snapshots + 1);
  snapshots_.push_back(u);
  for (std::size_t s = 0; s < settings_.snapshots; ++s) {
    for (std::size_t step = 0; step < steps_per_snapshot; ++step) {
      for (double& v : u) v = reaction_flow(v, 0.5 * dt);
      fft.fwd(spectrum, u);
      for (std::size_t j = 0; j < n; ++j) spectrum[j] *= decay[j];
      fft.inv(u, spectrum);
      for (double& v : u) v = reaction_flow(v, 0.5 * dt);
    }
    snapshots_.push_back(u);
  }
}

double AllenCahnReference::operator()(double t, double x) const {
  const std::size_t n = settings_.grid;
  t = std::clamp(t, 0.0, 1.0);
  double xi = (x + 1.0) * 0.5;
  xi -= std::floor(xi);
  const double pos = xi * static_cast<double>(n);
  const auto j0 = static_cast<std::size_t>(std::floor(pos)) % n;
  const std::size_t j1 = (j0 + 1) % n;
  const double wx = pos - std::floor(pos);

  const double tpos = t * static_cast<double>(settings_.snapshots);
  const auto s0 = std::min(static_cast<std::size_t>(std::floor(tpos)), settings_.snapshots - 1);
  const double wt = tpos - static_cast<double>(s0);
  auto at = [&](std::size_t s) {
    return (1.0 - wx) * snapshots_[s][j0] + wx * snapshots_[s][j1];
  };
  return (1.0 - wt) * at(s0) + wt * at(s0 + 1);
}

const AllenCahnReference& AllenCahnReference::shared() {
  static const AllenCahnReference instance;
  return instance;
}

}  // namespace dngd::pde
