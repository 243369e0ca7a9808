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

#ifndef LMAGP_BLOCKMAT_HPP_
#define LMAGP_BLOCKMAT_HPP_

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>

#include "lmagp/kernel.hpp"
#include "lmagp/types.hpp"

namespace lmagp {

/// Parameters of the diagonal jitter ladder used by cholesky_jittered.
/// The first attempt uses no jitter; retry k (k = 0..max_retries-1) adds
/// first_relative * 10^k * mean(diag(A)).
struct JitterLadder {
  static constexpr double first_relative = 1e-10;
  static constexpr double growth = 10.0;
  static constexpr int max_retries = 6;
};

/// Process-wide record of jitter applied by cholesky_jittered, surfaced in
/// run metadata.
struct JitterStats {
  std::size_t factorizations = 0;
  std::size_t jittered = 0;
  double max_jitter = 0.0;
};
JitterStats jitter_stats();
void reset_jitter_stats();

/// Cholesky factorization L L^T = A + jitter * I.
class Cholesky {
public:
  Cholesky() = default;

  Index size() const { return llt_.rows(); }
  double jitter() const { return jitter_; }

  Matrix matrix_l() const;
  /// A^{-1} B.
  Matrix solve(const Matrix &b) const;
  Vector solve(const Vector &b) const;
  /// L^{-1} B.
  Matrix solve_lower(const Matrix &b) const;
  Vector solve_lower(const Vector &b) const;
  /// log |A + jitter I|.
  double log_determinant() const;
  /// (A + jitter I)^{-1}, materialized. Meant for small matrices.
  Matrix inverse() const;

private:
  friend Cholesky cholesky_jittered(const Matrix &a);
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
  bool empty_ = true;
};

/// Factorizes a symmetric matrix, climbing the jitter ladder on failure.
/// Throws NotPositiveDefinite once the ladder is exhausted.
Cholesky cholesky_jittered(const Matrix &a);

/// Dense matrix partitioned into a grid of blocks.
class BlockMatrix {
public:
  BlockMatrix() = default;
  /// Zero-initialized blocks.
  BlockMatrix(std::vector<Index> row_sizes, std::vector<Index> col_sizes);

  static BlockMatrix from_dense(const Matrix &dense,
                                std::vector<Index> row_sizes,
                                std::vector<Index> col_sizes);

  int block_rows() const { return static_cast<int>(row_sizes_.size()); }
  int block_cols() const { return static_cast<int>(col_sizes_.size()); }
  const std::vector<Index> &row_sizes() const { return row_sizes_; }
  const std::vector<Index> &col_sizes() const { return col_sizes_; }
  Index rows() const;
  Index cols() const;

  const Matrix &block(int m, int n) const;
  void set_block(int m, int n, Matrix value);

  Matrix to_dense() const;

private:
  std::size_t flat(int m, int n) const;

  std::vector<Index> row_sizes_;
  std::vector<Index> col_sizes_;
  std::vector<Matrix> blocks_;
};

/// Offsets of consecutive blocks with the given sizes (size + 1 entries).
std::vector<Index> block_offsets(const std::vector<Index> &sizes);

/// Low-rank projection onto a support set S. Holds the factorization of
/// the support covariance so the projections below reuse it.
class SupportProjector {
public:
  /// Throws InvalidArgument for an empty support set and
  /// IllConditionedSupport when its covariance cannot be factorized.
  SupportProjector(PointSet support, Hyperparams hyper);

  const PointSet &support() const { return support_; }
  const Hyperparams &hyper() const { return hyper_; }
  const Cholesky &support_factor() const { return factor_; }
  const Matrix &support_covariance() const { return sigma_ss_; }

  /// L^{-1} Sigma_{S,B}, the whitened cross-covariance (|S| x |B|).
  Matrix whiten(const PointSet &b) const;
  /// Sigma_{A,S} Sigma_SS^{-1} Sigma_{S,B}.
  Matrix q(const PointSet &a, const PointSet &b) const;
  /// Sigma_{A,B} - q(A, B).
  Matrix r(const PointSet &a, const PointSet &b) const;

private:
  PointSet support_;
  Hyperparams hyper_;
  Matrix sigma_ss_;
  Cholesky factor_;
};

/// Q_{B1,B2}, computed with a Cholesky solve against the support
/// covariance.
Matrix q_matrix(const PointSet &b1, const PointSet &b2,
                const PointSet &support, const Hyperparams &h);
/// R_{B1,B2} = Sigma_{B1,B2} - Q_{B1,B2}.
Matrix r_matrix(const PointSet &b1, const PointSet &b2,
                const PointSet &support, const Hyperparams &h);

/// 0.5 (tr(R Rhat^{-1}) - log|R Rhat^{-1}| - n) for SPD R and Rhat.
double kl_distance(const Matrix &r, const Matrix &rhat);

/// Block upper-triangular factor U with U^T U equal to the inverse of a
/// block matrix whose inverse is B-block-banded. Only the blocks
/// U(m, m..m+B) are stored; every other block is structurally zero.
class BandedBlockFactor {
public:
  BandedBlockFactor(std::vector<Index> block_sizes, int bandwidth);

  int blocks() const { return static_cast<int>(sizes_.size()); }
  int bandwidth() const { return bandwidth_; }
  const std::vector<Index> &block_sizes() const { return sizes_; }

  /// True when block (m, n) lies in the stored band (m <= n <= m + B).
  bool in_band(int m, int n) const;
  /// The stored block (m, n); throws for structurally zero blocks.
  const Matrix &block(int m, int n) const;
  void set_block(int m, int n, Matrix value);

  /// U v.
  Vector apply(const Vector &v) const;
  /// U^T v.
  Vector apply_transpose(const Vector &v) const;
  /// U^T U v.
  Vector apply_inverse(const Vector &v) const {
    return apply_transpose(apply(v));
  }

  Matrix to_dense() const;

private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
  int bandwidth_;
  // band_[m][k] holds block (m, m + k), k = 0..min(B, M - 1 - m).
  std::vector<std::vector<Matrix>> band_;
};

/// Upper block factor of the inverse of the Markov residual approximation
/// of order `bandwidth`, built block by block without forming the dense
/// residual approximation. Factorization failures are reported with the
/// offending block.
BandedBlockFactor banded_inverse_cholesky(const std::vector<PointSet> &blocks,
                                          const SupportProjector &projector,
                                          int bandwidth);
BandedBlockFactor banded_inverse_cholesky(const std::vector<PointSet> &blocks,
                                          const PointSet &support,
                                          const Hyperparams &h, int bandwidth);

/// Upper-triangular U with U^T U = C^{-1} for SPD C, obtained by factoring
/// C in reversed order so no inverse of C is formed.
Matrix upper_inverse_factor(const Matrix &c);

} // namespace lmagp

#endif // LMAGP_BLOCKMAT_HPP_
