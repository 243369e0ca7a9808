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

#ifndef LMAGP_LMA_HPP_
#define LMAGP_LMA_HPP_

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "lmagp/baselines.hpp"
#include "lmagp/blockmat.hpp"
#include "lmagp/kernel.hpp"
#include "lmagp/partition.hpp"

namespace lmagp {

struct LmaConfig {
  int markov_order = 1;    // B
  Index support_size = 16; // |S|
  int blocks = 4;          // M
  std::uint64_t support_seed = 0;
  // Give the support points the identities of the training points they
  // were drawn from, so noise terms are shared between S and D.
  bool shared_support_identity = false;

  /// Throws InvalidArgument unless 0 <= B <= M-1, |S| >= 1 and M >= 1.
  void validate() const;
};

/// Partition, support set and blocked point sets for one run.
struct LmaProblem {
  BlockPartition partition;
  SupportSet support;
  BlockedData data;
};

LmaProblem prepare_problem(const Dataset &train, const Matrix &test,
                           const LmaConfig &config);

/// Blocked data plus the support projection and Markov order shared by
/// every LMA computation on one problem.
class LmaContext {
public:
  LmaContext(BlockedData data, Hyperparams hyper, int bandwidth);

  int blocks() const { return data_.blocks(); }
  int bandwidth() const { return bandwidth_; }
  const Hyperparams &hyper() const { return hyper_; }
  const BlockedData &data() const { return data_; }
  const SupportProjector &projector() const { return projector_; }

  const PointSet &train_block(int m) const { return data_.train[m]; }
  const PointSet &test_block(int m) const { return data_.test[m]; }
  /// V_m = D_m followed by U_m.
  const PointSet &v_block(int m) const { return v_[m]; }
  /// First and last block index of D^B_m (empty when first > last).
  std::pair<int, int> blanket_range(int m) const;
  /// D^B_m and its outputs.
  PointSet blanket(int m) const;
  Vector blanket_outputs(int m) const;

  std::vector<Index> train_sizes() const;
  std::vector<Index> test_sizes() const;
  PointSet all_train() const { return PointSet::concat(data_.train); }
  PointSet all_test() const { return PointSet::concat(data_.test); }
  Vector all_outputs() const;

private:
  BlockedData data_;
  Hyperparams hyper_;
  int bandwidth_;
  SupportProjector projector_;
  std::vector<PointSet> v_;
};

/// Memoized residual approximation R-bar over the V blocks. Inside the
/// band the exact residual covariance is used; blocks further apart are
/// obtained by conditioning on the next B training blocks.
class ResidualRecursion {
public:
  explicit ResidualRecursion(const LmaContext &ctx) : ctx_(ctx) {}

  /// R-bar_{V_m V_n}.
  Matrix block(int m, int n);
  /// R-bar_{D_m D_n}.
  Matrix train_block(int m, int n);

private:
  const Matrix &upper(int m, int n);
  const Cholesky &blanket_factor(int m);

  const LmaContext &ctx_;
  std::map<std::pair<int, int>, Matrix> memo_;
  std::map<int, Cholesky> factors_;
};

/// R-bar_{V_m V_n} for a single pair of blocks.
Matrix rbar_block(const LmaContext &ctx, int m, int n);

/// Sigma-bar_{V_m V_n}: the exact covariance inside the band, Q + R-bar
/// outside it.
Matrix sigma_bar(const LmaContext &ctx, ResidualRecursion &rec, int m, int n);

/// Dense approximate prior assembled in block order.
struct DensePrior {
  Matrix train_train; // Sigma-bar_DD
  Matrix test_train;  // Sigma-bar_UD
  Matrix test_test;   // Sigma-bar_UU, only when requested
};
DensePrior assemble_prior(const LmaContext &ctx, bool with_test_test);

/// Dense R-bar_DD in block order.
Matrix assemble_rbar_train(const LmaContext &ctx);

/// Predictive distribution by dense solves against the assembled prior.
/// O(|D|^3); intended for small instances.
Prediction lma_predict_direct(const LmaContext &ctx, bool want_cov);
Prediction lma_predict_direct(const Dataset &train, const Matrix &test,
                              const Hyperparams &h, const LmaConfig &config,
                              bool want_cov);

/// Residual conditioning terms of block m on its blanket D^B_m.
struct BlanketTerms {
  Matrix r_blanket_block; // R_{D^B_m D_m}
  Cholesky blanket_factor; // of R_{D^B_m D^B_m}
  Matrix rprime;           // R_{D_m D^B_m} R_{D^B_m D^B_m}^{-1}
};
BlanketTerms make_blanket_terms(const SupportProjector &proj,
                                const PointSet &block,
                                const PointSet &blanket);

/// R-bar and Sigma-bar between every training block and the block-ordered
/// test set. Entry k has |D_k| rows and |U| columns.
struct CrossCovariances {
  std::vector<Matrix> rbar;
  std::vector<Matrix> sigma_bar;
};

/// Sweeps the recursion outward from the band for each test block, once
/// towards lower block indices and once towards higher ones.
CrossCovariances compute_rbar_cross(const LmaContext &ctx);
CrossCovariances compute_rbar_cross(const LmaContext &ctx,
                                    const std::vector<BlanketTerms> &terms);

/// Sigma-bar_{D_k U} from R-bar_{D_k U}: Q plus R-bar outside the band,
/// the exact covariance inside it.
Matrix sigma_bar_from_rbar(const SupportProjector &proj, const PointSet &dk,
                           int k, const std::vector<PointSet> &test_blocks,
                           const Matrix &rbar_ku, const Hyperparams &h,
                           int bandwidth);

/// Local summary of one block.
struct LocalSummary {
  Vector y_dot;
  Cholesky schur;  // of R_mm - R' R_{D^B_m D_m}, the inverse of R-dot
  Matrix sigma_dot_s;
  Matrix sigma_dot_u;

  /// R-dot_m, materialized.
  Matrix r_dot() const { return schur.inverse(); }
};

LocalSummary make_local_summary(const SupportProjector &proj,
                                const PointSet &block, const Vector &outputs,
                                const PointSet &blanket,
                                const Vector &blanket_outputs,
                                const Matrix &sigma_bar_block_u,
                                const Matrix &sigma_bar_blanket_u, double mu,
                                const BlanketTerms &terms, int block_index);

/// Local summary of block m. Requires B >= 1.
LocalSummary local_summary(const LmaContext &ctx, int m,
                           const CrossCovariances &cross);
LocalSummary local_summary(const LmaContext &ctx, int m,
                           const CrossCovariances &cross,
                           const BlanketTerms &terms);

/// How much of the test-test aggregate to keep.
enum class TestCovariance { diagonal, block_diagonal, full };

/// One block's additive share of the global summary.
struct LocalContribution {
  Vector y_s;
  Vector y_u;
  Matrix ss;
  Matrix us;
  Vector uu_diag;
  std::vector<Matrix> uu_blocks; // block_diagonal mode
  Matrix uu;                     // full mode
};

LocalContribution contribute(const LocalSummary &local,
                             const std::vector<Index> &test_sizes,
                             TestCovariance mode);

struct GlobalSummary {
  Vector y_s;
  Vector y_u;
  Matrix ss;
  Matrix us;
  Vector uu_diag;
  std::vector<Matrix> uu_blocks;
  Matrix uu;
};

/// Sums the contributions in ascending block order on top of Sigma_SS.
GlobalSummary reduce_contributions(const Matrix &sigma_ss,
                                   const std::vector<LocalContribution> &parts,
                                   TestCovariance mode);

GlobalSummary global_summary(const std::vector<LocalSummary> &locals,
                             const SupportProjector &proj,
                             const std::vector<Index> &test_sizes,
                             TestCovariance mode);

/// Predictive mean and variance from global-summary pieces for a set of
/// test rows. `sigma_bar_uu` and `uu` are used only when want_cov is set.
Prediction predict_from_summary(const Vector &y_s, const Matrix &ss,
                                const Vector &y_u, const Matrix &us,
                                const Vector &uu_diag, const Vector &prior_diag,
                                const Matrix *sigma_bar_uu, const Matrix *uu,
                                double mu, bool want_cov);

/// Sigma-bar_UU in block order, using cross blocks already computed.
Matrix assemble_sigma_bar_test(const LmaContext &ctx,
                               const CrossCovariances &cross);

/// Summary-form predictor. Requires B >= 1.
Prediction lma_predict_summary(const LmaContext &ctx, bool want_cov);
Prediction lma_predict_summary(const Dataset &train, const Matrix &test,
                               const Hyperparams &h, const LmaConfig &config,
                               bool want_cov);

/// Summary-form predictor for B >= 1, direct PIC for B = 0.
Prediction lma_predict(const Dataset &train, const Matrix &test,
                       const Hyperparams &h, const LmaConfig &config,
                       bool want_cov);

} // namespace lmagp

#endif // LMAGP_LMA_HPP_
