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

#include "dngd/pde/stde.hpp"

#include "dngd/error.hpp"

#include <numeric>

namespace dngd::pde {

std::vector<std::uint32_t> draw_coordinate_subset(std::size_t d, std::size_t k,
                                                  std::mt19937_64& rng) {
  require(k >= 1, ErrorCode::invalid_argument, "STDE subset size must be at least 1");
  require(k <= d, ErrorCode::invalid_argument,
          "STDE subset size " + std::to_string(k) + " exceeds dimension " + std::to_string(d));
  std::vector<std::uint32_t> pool(d);
  std::iota(pool.begin(), pool.end(), 0u);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, d - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

double stde_laplacian(const model::Ansatz& u, const Vector& theta, std::span<const double> x,
                      std::size_t k, std::mt19937_64& rng) {
  const auto subset = draw_coordinate_subset(x.size(), k, rng);
  return stde_laplacian(u, theta, x, subset);
}

double stde_laplacian(const model::Ansatz& u, const Vector& theta, std::span<const double> x,
                      std::span<const std::uint32_t> subset) {
  require(!subset.empty() && subset.size() <= x.size(), ErrorCode::invalid_argument,
          "STDE subset size must lie in [1, d]");
  for (std::uint32_t j : subset)
    require(j < x.size(), ErrorCode::invalid_argument, "STDE coordinate index out of range");
  return stde_estimate<double>(u, {theta.data(), static_cast<std::size_t>(theta.size())}, x,
                               subset);
}

double exact_laplacian(const model::Ansatz& u, const Vector& theta, std::span<const double> x) {
  const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    sum += model::directional_jet<double>(u, th, x, j).d2;
  return sum;
}

}  // namespace dngd::pde
