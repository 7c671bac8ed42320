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

#include <cstddef>
#include <vector>

namespace dngd::pde {

// Numerical solution of u_t = D u_xx + 5u - 5u^3 on x in [-1, 1) (periodic),
// t in [0, 1], u(0, x) = x^2 cos(pi x). Fourier pseudo-spectral in space with
// Strang splitting: the reaction substep uses its closed-form solution and the
// diffusion substep is exact in Fourier space.
class AllenCahnReference {
 public:
  struct Settings {
    std::size_t grid = 1024;
    double dt = 2e-4;
    std::size_t snapshots = 200;  // intervals on [0, 1]
    double diffusion = 1e-4;
  };

  AllenCahnReference();
  explicit AllenCahnReference(const Settings& settings);

  // Bilinear interpolation in (t, x); x is wrapped into [-1, 1).
  double operator()(double t, double x) const;

  std::size_t grid() const { return settings_.grid; }
  // Values at the grid nodes x_j = -1 + 2j/N for snapshot s.
  const std::vector<double>& snapshot(std::size_t s) const { return snapshots_[s]; }

  // Process-wide instance with default settings, built on first use.
  static const AllenCahnReference& shared();

 private:
  Settings settings_;
  std::vector<std::vector<double>> snapshots_;
};

}  // namespace dngd::pde
