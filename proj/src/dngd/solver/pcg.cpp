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

#include "dngd/solver/pcg.hpp"

#include "dngd/error.hpp"

#include <algorithm>
#include <cmath>

namespace dngd::solver {

PcgResult pcg_solve(const LinearMap& A, const LinearMap& precond, const Vector& b, double tol,
                    std::size_t max_iters) {
  require(tol > 0.0, ErrorCode::invalid_argument, "CG tolerance must be positive");
  PcgResult out;
  out.x = Vector::Zero(b.size());
  const double b_norm = b.norm();
  const double guard = 1e-300 * std::max(1.0, b_norm * b_norm);
  const double target = tol * b_norm;

  Vector r = b;
  out.residual_norm = b_norm;
  if (b_norm <= target || b_norm == 0.0) {
    out.converged = true;
    return out;
  }
  Vector z = precond ? precond(r) : r;
  Vector p = z;
  double rho = r.dot(z);
  if (std::abs(rho) <= guard) {
    out.breakdown = true;
    return out;
  }

  Vector x = out.x;
  double best = b_norm;
  while (out.iterations < max_iters) {
    const Vector Ap = A(p);
    const double pAp = p.dot(Ap);
    if (std::abs(pAp) <= guard) {
      out.breakdown = true;
      break;
    }
    const double alpha = rho / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    ++out.iterations;
    const double r_norm = r.norm();
    if (r_norm < best) {
      best = r_norm;
      out.x = x;
      out.residual_norm = r_norm;
    }
    if (r_norm <= target) {
      out.converged = true;
      break;
    }
    z = precond ? precond(r) : r;
    const double rho_next = r.dot(z);
    if (std::abs(rho_next) <= guard) {
      out.breakdown = true;
      break;
    }
    p = z + (rho_next / rho) * p;
    rho = rho_next;
  }
  return out;
}

}  // namespace dngd::solver
