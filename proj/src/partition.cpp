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

#include "lmagp/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "lmagp/errors.hpp"

namespace lmagp {

std::vector<Index> BlockPartition::train_sizes() const {
  std::vector<Index> out;
  for (const auto &b : train_blocks)
    out.push_back(static_cast<Index>(b.size()));
  return out;
}

std::vector<Index> BlockPartition::test_sizes() const {
  std::vector<Index> out;
  for (const auto &b : test_blocks)
    out.push_back(static_cast<Index>(b.size()));
  return out;
}

std::vector<Index> BlockPartition::markov_blanket(int m, int bandwidth) const {
  std::vector<Index> out;
  const int last = std::min(m + bandwidth, blocks() - 1);
  for (int k = m + 1; k <= last; ++k)
    out.insert(out.end(), train_blocks[k].begin(), train_blocks[k].end());
  return out;
}

std::vector<Index> BlockPartition::test_order() const {
  std::vector<Index> out;
  for (const auto &b : test_blocks)
    out.insert(out.end(), b.begin(), b.end());
  return out;
}

namespace {

Vector principal_axis(const Matrix &x) {
  const Index d = x.cols();
  if (d == 1)
    return Vector::Ones(1);
  const Matrix centered = x.rowwise() - x.colwise().mean();
  const Matrix cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  Vector axis = eig.eigenvectors().col(d - 1);
  Index arg = 0;
  axis.cwiseAbs().maxCoeff(&arg);
  if (axis(arg) < 0)
    axis = -axis;
  return axis;
}

} // namespace

void assign_test_blocks(BlockPartition &p, const Matrix &test) {
  const int m_count = p.blocks();
  if (test.rows() > 0 && test.cols() != p.centroids.cols())
    throw InvalidArgument("test inputs have dimension " +
                          std::to_string(test.cols()) + ", expected " +
                          std::to_string(p.centroids.cols()));
  p.test_blocks.assign(m_count, {});
  for (Index i = 0; i < test.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < m_count; ++m) {
      const double dist = (p.centroids.row(m) - test.row(i)).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = m;
      }
    }
    p.test_blocks[best].push_back(i);
  }
}

BlockPartition partition_inputs(const Dataset &train, const Matrix &test,
                                int blocks) {
  const Index n = train.size();
  if (blocks < 1)
    throw InvalidArgument("number of blocks must be at least 1");
  if (blocks > n)
    throw InvalidArgument("number of blocks (" + std::to_string(blocks) +
                          ") exceeds training size (" + std::to_string(n) +
                          ")");
  if (!train.inputs.allFinite() || !test.allFinite())
    throw InvalidArgument("inputs must be finite");

  const Vector score = train.inputs * principal_axis(train.inputs);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return score(a) < score(b); });

  BlockPartition p;
  p.train_blocks.resize(blocks);
  p.centroids = Matrix::Zero(blocks, train.dimension());
  const Index base = n / blocks;
  const Index extra = n % blocks;
  Index pos = 0;
  for (int m = 0; m < blocks; ++m) {
    const Index len = base + (m < extra ? 1 : 0);
    auto &blk = p.train_blocks[m];
    blk.assign(order.begin() + pos, order.begin() + pos + len);
    std::sort(blk.begin(), blk.end());
    for (Index i : blk)
      p.centroids.row(m) += train.inputs.row(i);
    p.centroids.row(m) /= static_cast<double>(len);
    pos += len;
  }
  assign_test_blocks(p, test);
  return p;
}

PointSet SupportSet::points(const Matrix &train_inputs,
                            bool shared_identity) const {
  return PointSet::from_rows(train_inputs, indices,
                             shared_identity ? PointDomain::train
                                             : PointDomain::support);
}

SupportSet select_support(const Dataset &train, Index size,
                          std::uint64_t seed) {
  const Index n = train.size();
  if (size < 1 || size > n)
    throw InvalidArgument("support size " + std::to_string(size) +
                          " outside [1, " + std::to_string(n) + "]");
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < size; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  SupportSet s;
  s.seed = seed;
  s.indices.assign(pool.begin(), pool.begin() + size);
  std::sort(s.indices.begin(), s.indices.end());
  return s;
}

BlockedData make_blocked(const Dataset &train, const Matrix &test,
                         const BlockPartition &p, const SupportSet &s,
                         bool shared_support_identity) {
  if (!train.has_outputs())
    throw InvalidArgument("training data has no outputs");
  BlockedData out;
  for (int m = 0; m < p.blocks(); ++m) {
    const auto &rows = p.train_blocks[m];
    out.train.push_back(
        PointSet::from_rows(train.inputs, rows, PointDomain::train));
    Vector y(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      y(static_cast<Index>(i)) = train.outputs(rows[i]);
    out.outputs.push_back(std::move(y));
    out.test.push_back(
        PointSet::from_rows(test, p.test_blocks[m], PointDomain::test));
  }
  out.support = s.points(train.inputs, shared_support_identity);
  out.test_order = p.test_order();
  return out;
}

} // namespace lmagp
