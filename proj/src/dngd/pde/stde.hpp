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

#include "dngd/collocation.hpp"
#include "dngd/model/ansatz.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dngd::pde {

// Stochastic Taylor estimate of the Laplacian from a coordinate subset J:
//   (d / |J|) * sum_{j in J} d2u/dx_j2,
// each term from one input 2-jet along e_j.
template <class W>
W stde_estimate(const model::Ansatz& u, std::span<const W> theta, std::span<const double> x,
                std::span<const std::uint32_t> subset) {
  W sum(0.0);
  for (std::uint32_t j : subset) sum = sum + model::directional_jet<W>(u, theta, x, j).d2;
  const double scale = static_cast<double>(x.size()) / static_cast<double>(subset.size());
  return sum * W(scale);
}

// k distinct coordinates out of d, uniformly without replacement.
std::vector<std::uint32_t> draw_coordinate_subset(std::size_t d, std::size_t k,
                                                  std::mt19937_64& rng);

// Draws J with |J| = k and returns the estimate. Requires 1 <= k <= d.
double stde_laplacian(const model::Ansatz& u, const Vector& theta, std::span<const double> x,
                      std::size_t k, std::mt19937_64& rng);

double stde_laplacian(const model::Ansatz& u, const Vector& theta, std::span<const double> x,
                      std::span<const std::uint32_t> subset);

// Full d-pass Laplacian.
double exact_laplacian(const model::Ansatz& u, const Vector& theta, std::span<const double> x);

}  // namespace dngd::pde
