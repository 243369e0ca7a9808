/*
 * Copyright 2026 The lmagp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LMAGP_BASELINES_HPP_
#define LMAGP_BASELINES_HPP_

#include <optional>
#include <vector>

#include "lmagp/kernel.hpp"
#include "lmagp/partition.hpp"
#include "lmagp/types.hpp"

namespace lmagp {

/// Posterior over the test points, in test input order.
struct Prediction {
  Vector mean;
  Vector variance;
  std::optional<Matrix> covariance; // only when requested

  Index size() const { return mean.size(); }
};

/// Conditions a jointly Gaussian prior on the residual `resid` = y - mu:
/// mean = mu + Sigma_UD Sigma_DD^{-1} resid and
/// cov = Sigma_UU - Sigma_UD Sigma_DD^{-1} Sigma_DU.
/// `prior_uu_diag` is always needed; `prior_uu` only when want_cov is set.
/// Throws IllConditionedData when Sigma_DD cannot be factorized.
Prediction gaussian_condition(const Matrix &sigma_dd, const Matrix &sigma_ud,
                              const Vector &prior_uu_diag,
                              const Matrix *prior_uu, const Vector &resid,
                              double mu, bool want_cov);

/// Reorders a prediction made in block order back to test input order.
/// Row i of `blocked` belongs to test point order[i].
Prediction unpermute(const Prediction &blocked,
                     const std::vector<Index> &order);

/// Exact GP posterior. O(|D|^3) time and O(|D|^2) memory.
Prediction fgp_predict(const Dataset &train, const Matrix &test,
                       const Hyperparams &h, bool want_cov);

/// Dense PIC prior over the training blocks: exact covariance inside each
/// block and the low-rank term Q between blocks.
Matrix pic_prior(const BlockedData &data, const Hyperparams &h);

/// PIC posterior by dense inversion of its prior. Meant for small
/// instances and cross-checks.
Prediction pic_predict_direct(const Dataset &train, const Matrix &test,
                              const Hyperparams &h, const SupportSet &support,
                              const BlockPartition &partition, bool want_cov,
                              bool shared_support_identity = false);

} // namespace lmagp

#endif // LMAGP_BASELINES_HPP_
