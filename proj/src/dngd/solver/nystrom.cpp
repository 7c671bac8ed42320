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

#include "dngd/solver/nystrom.hpp"

#include "dngd/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <string>

namespace dngd::solver {

namespace {

// Partial Fisher-Yates over [0, m).
std::vector<std::size_t> sample_without_replacement(std::size_t m, std::size_t count,
                                                    std::mt19937_64& rng) {
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, m - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

std::vector<std::size_t> choose_landmarks(std::size_t m, std::size_t count,
                                          std::mt19937_64& rng) {
  require(count >= 1 && count <= m, ErrorCode::invalid_argument,
          "landmark count " + std::to_string(count) + " must lie in [1, " + std::to_string(m) +
              "]");
  auto idx = sample_without_replacement(m, count, rng);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> choose_landmarks_stratified(std::span<const std::size_t> offsets,
                                                     std::size_t count, std::mt19937_64& rng) {
  require(offsets.size() >= 2, ErrorCode::invalid_argument, "empty residual partition");
  const std::size_t m = offsets.back();
  require(count >= 1 && count <= m, ErrorCode::invalid_argument,
          "landmark count must lie in [1, m]");
  // Largest-remainder apportionment of `count` over the classes.
  const std::size_t classes = offsets.size() - 1;
  std::vector<std::size_t> share(classes);
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const std::size_t size = offsets[c + 1] - offsets[c];
    const double exact = static_cast<double>(count) * static_cast<double>(size) /
                         static_cast<double>(m);
    share[c] = std::min(size, static_cast<std::size_t>(exact));
    assigned += share[c];
    remainder.emplace_back(exact - static_cast<double>(share[c]), c);
  }
  std::sort(remainder.begin(), remainder.end(), std::greater<>());
  for (std::size_t k = 0; assigned < count; k = (k + 1) % classes) {
    const std::size_t c = remainder[k].second;
    if (share[c] < offsets[c + 1] - offsets[c]) {
      ++share[c];
      ++assigned;
    }
  }
  std::vector<std::size_t> idx;
  for (std::size_t c = 0; c < classes; ++c) {
    if (share[c] == 0) continue;
    for (std::size_t local : sample_without_replacement(offsets[c + 1] - offsets[c], share[c], rng))
      idx.push_back(offsets[c] + local);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

NystromPreconditioner nystrom_from_landmarks(const GramianOperator& K,
                                             std::vector<std::size_t> landmarks, double lambda,
                                             const NystromOptions& options) {
  require(lambda > 0.0, ErrorCode::invalid_argument, "Nystrom damping must be positive");
  const auto m = static_cast<Eigen::Index>(K.size());
  const auto l = static_cast<Eigen::Index>(landmarks.size());
  require(l >= 1 && l <= m, ErrorCode::invalid_argument, "landmark count must lie in [1, m]");

  NystromPreconditioner P;
  P.lambda = lambda;
  P.U.resize(m, 0);
  P.landmarks = std::move(landmarks);

  const Matrix C = K.columns(P.landmarks);  // K(:, I)
  Matrix K_II(l, l);
  for (Eigen::Index a = 0; a < l; ++a)
    K_II.row(a) = C.row(static_cast<Eigen::Index>(P.landmarks[static_cast<std::size_t>(a)]));
  K_II = 0.5 * (K_II + K_II.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(K_II);
  require(eig.info() == Eigen::Success, ErrorCode::numerical_failure,
          "eigendecomposition of the landmark block failed");
  const Vector& evals = eig.eigenvalues();  // ascending
  const double top = evals[l - 1];
  if (!(top > 0.0)) return P;
  Eigen::Index r = 0;
  while (r < l && evals[l - 1 - r] > options.relative_threshold * top) ++r;

  // Q and Lambda_Q restricted to the kept pairs, descending.
  Matrix Q(l, r);
  Vector lam(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    Q.col(k) = eig.eigenvectors().col(l - 1 - k);
    lam[k] = evals[l - 1 - k];
  }

  // U~ = K(:, I) Q Lambda^{-1}, with the landmark rows set to Q exactly.
  Matrix Ut = C * Q * lam.cwiseInverse().asDiagonal();
  for (Eigen::Index a = 0; a < l; ++a)
    Ut.row(static_cast<Eigen::Index>(P.landmarks[static_cast<std::size_t>(a)])) = Q.row(a);

  // U~ Lambda^{1/2} = V Sigma W^T gives K ~ V Sigma^2 V^T.
  const Matrix B = Ut * lam.cwiseSqrt().asDiagonal();
  Eigen::BDCSVD<Matrix> svd(B, Eigen::ComputeThinU);
  require(svd.info() == Eigen::Success, ErrorCode::numerical_failure,
          "SVD in the Nystrom construction failed");
  P.U = svd.matrixU();
  P.eigenvalues = svd.singularValues().cwiseAbs2();
  return P;
}

NystromPreconditioner nystrom_build(const GramianOperator& K, std::size_t num_landmarks,
                                    double lambda, std::mt19937_64& rng,
                                    const NystromOptions& options) {
  return nystrom_from_landmarks(K, choose_landmarks(K.size(), num_landmarks, rng), lambda,
                                options);
}

NystromPreconditioner nystrom_build(const ad::ResidualModel& model, const Vector& theta,
                                    const CollocationSet& points, std::size_t num_landmarks,
                                    double lambda, std::mt19937_64& rng,
                                    const NystromOptions& options) {
  const ResidualGramian K(model, theta, points);
  auto landmarks = options.stratified
                       ? choose_landmarks_stratified(points.offsets(), num_landmarks, rng)
                       : choose_landmarks(K.size(), num_landmarks, rng);
  return nystrom_from_landmarks(K, std::move(landmarks), lambda, options);
}

Vector precond_apply(const NystromPreconditioner& P, const Vector& v) {
  require(P.lambda > 0.0, ErrorCode::invalid_argument,
          "preconditioner damping must be positive");
  require(v.size() == P.U.rows(), ErrorCode::dimension_mismatch,
          "vector length does not match the preconditioner");
  if (P.U.cols() == 0) return v / P.lambda;
  const Vector c = P.U.transpose() * v;
  const Vector scaled = c.cwiseQuotient((P.eigenvalues.array() + P.lambda).matrix());
  return P.U * scaled + (v - P.U * c) / P.lambda;
}

}  // namespace dngd::solver
