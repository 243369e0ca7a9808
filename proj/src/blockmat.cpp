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

#include "lmagp/blockmat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "lmagp/errors.hpp"

namespace lmagp {

namespace {

std::atomic<std::size_t> g_factorizations{0};
std::atomic<std::size_t> g_jittered{0};
std::mutex g_max_mutex;
double g_max_jitter = 0.0;

void record_jitter(double jitter) {
  g_factorizations.fetch_add(1, std::memory_order_relaxed);
  if (jitter <= 0.0)
    return;
  g_jittered.fetch_add(1, std::memory_order_relaxed);
  std::lock_guard<std::mutex> lock(g_max_mutex);
  g_max_jitter = std::max(g_max_jitter, jitter);
}

// Eigen only reports a failure for non-positive pivots. A pivot that
// survives by rounding alone is treated as a failure too, so rank-deficient
// input climbs the ladder instead of producing a useless factor.
bool factor_ok(const Eigen::LLT<Matrix> &llt, double scale) {
  if (llt.info() != Eigen::Success)
    return false;
  const auto &l = llt.matrixLLT();
  const double floor =
      16.0 * std::numeric_limits<double>::epsilon() * scale;
  for (Index i = 0; i < l.rows(); ++i) {
    const double p = l(i, i);
    if (!std::isfinite(p) || p * p <= floor)
      return false;
  }
  return true;
}

} // namespace

JitterStats jitter_stats() {
  JitterStats s;
  s.factorizations = g_factorizations.load();
  s.jittered = g_jittered.load();
  std::lock_guard<std::mutex> lock(g_max_mutex);
  s.max_jitter = g_max_jitter;
  return s;
}

void reset_jitter_stats() {
  g_factorizations = 0;
  g_jittered = 0;
  std::lock_guard<std::mutex> lock(g_max_mutex);
  g_max_jitter = 0.0;
}

Cholesky cholesky_jittered(const Matrix &a) {
  if (a.rows() != a.cols())
    throw InvalidArgument("cholesky: matrix is " + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()));
  Cholesky out;
  out.empty_ = a.rows() == 0;
  if (out.empty_) {
    record_jitter(0.0);
    return out;
  }
  if (!a.allFinite())
    throw NotPositiveDefinite("cholesky: non-finite entries");

  const double scale = a.diagonal().cwiseAbs().maxCoeff();
  out.llt_.compute(a);
  if (factor_ok(out.llt_, scale)) {
    record_jitter(0.0);
    return out;
  }
  double base = std::abs(a.diagonal().mean());
  if (base == 0.0)
    base = 1.0;
  double jitter = JitterLadder::first_relative * base;
  for (int k = 0; k < JitterLadder::max_retries; ++k) {
    Matrix shifted = a;
    shifted.diagonal().array() += jitter;
    out.llt_.compute(shifted);
    if (factor_ok(out.llt_, scale + jitter)) {
      out.jitter_ = jitter;
      record_jitter(jitter);
      return out;
    }
    jitter *= JitterLadder::growth;
  }
  throw NotPositiveDefinite("cholesky: not positive definite after " +
                            std::to_string(JitterLadder::max_retries) +
                            " jitter retries (n=" + std::to_string(a.rows()) +
                            ")");
}

Matrix Cholesky::matrix_l() const {
  if (empty_)
    return Matrix(0, 0);
  return llt_.matrixL();
}

Matrix Cholesky::solve(const Matrix &b) const {
  if (b.rows() != size())
    throw InvalidArgument("cholesky solve: size mismatch");
  if (empty_ || b.cols() == 0)
    return Matrix::Zero(b.rows(), b.cols());
  return llt_.solve(b);
}

Vector Cholesky::solve(const Vector &b) const {
  if (b.size() != size())
    throw InvalidArgument("cholesky solve: size mismatch");
  if (empty_)
    return Vector(0);
  return llt_.solve(b);
}

Matrix Cholesky::solve_lower(const Matrix &b) const {
  if (b.rows() != size())
    throw InvalidArgument("cholesky solve: size mismatch");
  if (empty_ || b.cols() == 0)
    return Matrix::Zero(b.rows(), b.cols());
  return llt_.matrixL().solve(b);
}

Vector Cholesky::solve_lower(const Vector &b) const {
  if (b.size() != size())
    throw InvalidArgument("cholesky solve: size mismatch");
  if (empty_)
    return Vector(0);
  return llt_.matrixL().solve(b);
}

double Cholesky::log_determinant() const {
  if (empty_)
    return 0.0;
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Matrix Cholesky::inverse() const {
  return solve(Matrix(Matrix::Identity(size(), size())));
}

std::vector<Index> block_offsets(const std::vector<Index> &sizes) {
  std::vector<Index> off(sizes.size() + 1, 0);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 0)
      throw InvalidArgument("negative block size");
    off[i + 1] = off[i] + sizes[i];
  }
  return off;
}

BlockMatrix::BlockMatrix(std::vector<Index> row_sizes,
                         std::vector<Index> col_sizes)
    : row_sizes_(std::move(row_sizes)), col_sizes_(std::move(col_sizes)) {
  block_offsets(row_sizes_);
  block_offsets(col_sizes_);
  blocks_.reserve(row_sizes_.size() * col_sizes_.size());
  for (Index r : row_sizes_)
    for (Index c : col_sizes_)
      blocks_.push_back(Matrix::Zero(r, c));
}

BlockMatrix BlockMatrix::from_dense(const Matrix &dense,
                                    std::vector<Index> row_sizes,
                                    std::vector<Index> col_sizes) {
  BlockMatrix out(std::move(row_sizes), std::move(col_sizes));
  if (dense.rows() != out.rows() || dense.cols() != out.cols())
    throw InvalidArgument("block sizes do not cover the dense matrix");
  const auto ro = block_offsets(out.row_sizes_);
  const auto co = block_offsets(out.col_sizes_);
  for (int m = 0; m < out.block_rows(); ++m)
    for (int n = 0; n < out.block_cols(); ++n)
      out.blocks_[out.flat(m, n)] =
          dense.block(ro[m], co[n], out.row_sizes_[m], out.col_sizes_[n]);
  return out;
}

Index BlockMatrix::rows() const { return block_offsets(row_sizes_).back(); }
Index BlockMatrix::cols() const { return block_offsets(col_sizes_).back(); }

std::size_t BlockMatrix::flat(int m, int n) const {
  if (m < 0 || n < 0 || m >= block_rows() || n >= block_cols())
    throw InvalidArgument("block index (" + std::to_string(m) + "," +
                          std::to_string(n) + ") out of range");
  return static_cast<std::size_t>(m) * col_sizes_.size() +
         static_cast<std::size_t>(n);
}

const Matrix &BlockMatrix::block(int m, int n) const {
  return blocks_[flat(m, n)];
}

void BlockMatrix::set_block(int m, int n, Matrix value) {
  const std::size_t f = flat(m, n);
  if (value.rows() != row_sizes_[m] || value.cols() != col_sizes_[n])
    throw InvalidArgument("block (" + std::to_string(m) + "," +
                          std::to_string(n) + ") has the wrong shape");
  blocks_[f] = std::move(value);
}

Matrix BlockMatrix::to_dense() const {
  const auto ro = block_offsets(row_sizes_);
  const auto co = block_offsets(col_sizes_);
  Matrix out(ro.back(), co.back());
  for (int m = 0; m < block_rows(); ++m)
    for (int n = 0; n < block_cols(); ++n)
      out.block(ro[m], co[n], row_sizes_[m], col_sizes_[n]) = block(m, n);
  return out;
}

SupportProjector::SupportProjector(PointSet support, Hyperparams hyper)
    : support_(std::move(support)), hyper_(std::move(hyper)) {
  if (support_.size() == 0)
    throw InvalidArgument("support set must not be empty");
  sigma_ss_ = gram(support_, support_, hyper_);
  try {
    factor_ = cholesky_jittered(sigma_ss_);
  } catch (const NotPositiveDefinite &e) {
    throw IllConditionedSupport(std::string("support covariance: ") +
                                e.what());
  }
}

Matrix SupportProjector::whiten(const PointSet &b) const {
  return factor_.solve_lower(gram(support_, b, hyper_));
}

Matrix SupportProjector::q(const PointSet &a, const PointSet &b) const {
  const Matrix wa = whiten(a);
  if (&a == &b)
    return wa.transpose() * wa;
  return wa.transpose() * whiten(b);
}

Matrix SupportProjector::r(const PointSet &a, const PointSet &b) const {
  return gram(a, b, hyper_) - q(a, b);
}

Matrix q_matrix(const PointSet &b1, const PointSet &b2,
                const PointSet &support, const Hyperparams &h) {
  return SupportProjector(support, h).q(b1, b2);
}

Matrix r_matrix(const PointSet &b1, const PointSet &b2,
                const PointSet &support, const Hyperparams &h) {
  return SupportProjector(support, h).r(b1, b2);
}

double kl_distance(const Matrix &r, const Matrix &rhat) {
  if (r.rows() != r.cols() || rhat.rows() != rhat.cols() ||
      r.rows() != rhat.rows())
    throw InvalidArgument("kl_distance: dimension mismatch");
  const Index n = r.rows();
  if (n == 0)
    return 0.0;
  Eigen::LLT<Matrix> lr(r), lh(rhat);
  if (lr.info() != Eigen::Success)
    throw NotPositiveDefinite("kl_distance: R is not positive definite");
  if (lh.info() != Eigen::Success)
    throw NotPositiveDefinite("kl_distance: Rhat is not positive definite");
  // tr(Rhat^{-1} R) = ||Lhat^{-1} L_R||_F^2.
  const Matrix w = lh.matrixL().solve(Matrix(lr.matrixL()));
  const double trace = w.squaredNorm();
  const double logdet_r = 2.0 * lr.matrixLLT().diagonal().array().log().sum();
  const double logdet_h = 2.0 * lh.matrixLLT().diagonal().array().log().sum();
  return 0.5 * (trace - (logdet_r - logdet_h) - static_cast<double>(n));
}

BandedBlockFactor::BandedBlockFactor(std::vector<Index> block_sizes,
                                     int bandwidth)
    : sizes_(std::move(block_sizes)), bandwidth_(bandwidth) {
  const int m_count = static_cast<int>(sizes_.size());
  if (bandwidth_ < 0 || (m_count > 0 && bandwidth_ > m_count - 1))
    throw InvalidArgument("bandwidth must lie in [0, M-1]");
  offsets_ = block_offsets(sizes_);
  band_.resize(sizes_.size());
  for (int m = 0; m < m_count; ++m) {
    const int width = std::min(bandwidth_, m_count - 1 - m);
    for (int k = 0; k <= width; ++k)
      band_[m].push_back(Matrix::Zero(sizes_[m], sizes_[m + k]));
  }
}

bool BandedBlockFactor::in_band(int m, int n) const {
  return m >= 0 && n < blocks() && n >= m && n - m <= bandwidth_;
}

const Matrix &BandedBlockFactor::block(int m, int n) const {
  if (!in_band(m, n))
    throw InvalidArgument("block (" + std::to_string(m) + "," +
                          std::to_string(n) + ") is outside the band");
  return band_[m][n - m];
}

void BandedBlockFactor::set_block(int m, int n, Matrix value) {
  if (!in_band(m, n))
    throw InvalidArgument("block (" + std::to_string(m) + "," +
                          std::to_string(n) + ") is outside the band");
  if (value.rows() != sizes_[m] || value.cols() != sizes_[n])
    throw InvalidArgument("banded factor block has the wrong shape");
  band_[m][n - m] = std::move(value);
}

Vector BandedBlockFactor::apply(const Vector &v) const {
  if (v.size() != offsets_.back())
    throw InvalidArgument("banded factor apply: size mismatch");
  Vector out = Vector::Zero(v.size());
  for (int m = 0; m < blocks(); ++m)
    for (std::size_t k = 0; k < band_[m].size(); ++k) {
      const int n = m + static_cast<int>(k);
      out.segment(offsets_[m], sizes_[m]) +=
          band_[m][k] * v.segment(offsets_[n], sizes_[n]);
    }
  return out;
}

Vector BandedBlockFactor::apply_transpose(const Vector &v) const {
  if (v.size() != offsets_.back())
    throw InvalidArgument("banded factor apply: size mismatch");
  Vector out = Vector::Zero(v.size());
  for (int m = 0; m < blocks(); ++m)
    for (std::size_t k = 0; k < band_[m].size(); ++k) {
      const int n = m + static_cast<int>(k);
      out.segment(offsets_[n], sizes_[n]) +=
          band_[m][k].transpose() * v.segment(offsets_[m], sizes_[m]);
    }
  return out;
}

Matrix BandedBlockFactor::to_dense() const {
  Matrix out = Matrix::Zero(offsets_.back(), offsets_.back());
  for (int m = 0; m < blocks(); ++m)
    for (std::size_t k = 0; k < band_[m].size(); ++k) {
      const int n = m + static_cast<int>(k);
      out.block(offsets_[m], offsets_[n], sizes_[m], sizes_[n]) =
          band_[m][k];
    }
  return out;
}

Matrix upper_inverse_factor(const Matrix &c) {
  const Index n = c.rows();
  if (n == 0)
    return Matrix(0, 0);
  // J C J = L L^T with J the reversal; then C = V V^T for the upper
  // triangular V = J L J and C^{-1} = V^{-T} V^{-1}.
  const Matrix rc = c.reverse();
  const Cholesky f = cholesky_jittered(rc);
  const Matrix v = f.matrix_l().reverse();
  Matrix u = Matrix::Identity(n, n);
  v.triangularView<Eigen::Upper>().solveInPlace(u);
  return u.triangularView<Eigen::Upper>();
}

BandedBlockFactor banded_inverse_cholesky(const std::vector<PointSet> &blocks,
                                          const SupportProjector &projector,
                                          int bandwidth) {
  const int m_count = static_cast<int>(blocks.size());
  if (m_count == 0)
    throw InvalidArgument("banded_inverse_cholesky: no blocks");
  std::vector<Index> sizes;
  for (const auto &b : blocks)
    sizes.push_back(b.size());
  BandedBlockFactor out(sizes, bandwidth);

  for (int m = 0; m < m_count; ++m) {
    const int last = std::min(m + bandwidth, m_count - 1);
    std::vector<PointSet> tail(blocks.begin() + m + 1,
                               blocks.begin() + last + 1);
    const PointSet cond = PointSet::concat(tail);
    try {
      Matrix c = projector.r(blocks[m], blocks[m]);
      Matrix rprime;
      if (cond.size() > 0) {
        const Matrix r_bm = projector.r(cond, blocks[m]);
        const Cholesky fb = cholesky_jittered(projector.r(cond, cond));
        rprime = fb.solve(r_bm).transpose();
        c -= rprime * r_bm;
        c = 0.5 * (c + c.transpose()).eval();
      }
      const Matrix umm = upper_inverse_factor(c);
      out.set_block(m, m, umm);
      if (cond.size() > 0) {
        const Matrix ub = -umm * rprime;
        Index col = 0;
        for (int n = m + 1; n <= last; ++n) {
          out.set_block(m, n, ub.middleCols(col, sizes[n]));
          col += sizes[n];
        }
      }
    } catch (const NotPositiveDefinite &e) {
      throw BlockFactorizationError(m, e.what());
    }
  }
  return out;
}

BandedBlockFactor banded_inverse_cholesky(const std::vector<PointSet> &blocks,
                                          const PointSet &support,
                                          const Hyperparams &h,
                                          int bandwidth) {
  return banded_inverse_cholesky(blocks, SupportProjector(support, h),
                                 bandwidth);
}

} // namespace lmagp
