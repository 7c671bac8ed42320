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

#include <cstddef>
#include <functional>

namespace dngd::solver {

using LinearMap = std::function<Vector(const Vector&)>;

struct PcgResult {
  Vector x;
  std::size_t iterations = 0;
  bool converged = false;
  // Set when <p, Ap> or rho vanished; x is then the best iterate seen.
  bool breakdown = false;
  double residual_norm = 0.0;
};

// Preconditioned CG for an SPD operator A, stopping once ||r|| <= tol ||b||.
// `precond` applies M^{-1}; pass an empty function for plain CG.
PcgResult pcg_solve(const LinearMap& A, const LinearMap& precond, const Vector& b, double tol,
                    std::size_t max_iters);

}  // namespace dngd::solver
