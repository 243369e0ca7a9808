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

#ifndef LMAGP_PARTITION_HPP_
#define LMAGP_PARTITION_HPP_

#include <cstdint>
#include <vector>

#include "lmagp/types.hpp"

namespace lmagp {

/// Ordered disjoint blocks D_1..D_M of training indices and U_1..U_M of
/// test indices. Adjacent block indices are adjacent in the Markov band.
struct BlockPartition {
  std::vector<std::vector<Index>> train_blocks;
  std::vector<std::vector<Index>> test_blocks;
  Matrix centroids; // M x d, one train-block centroid per row

  int blocks() const { return static_cast<int>(train_blocks.size()); }
  std::vector<Index> train_sizes() const;
  std::vector<Index> test_sizes() const;
  /// Training indices of D^B_m, the union of the next B blocks.
  std::vector<Index> markov_blanket(int m, int bandwidth) const;
  /// Test indices in block order (U_1, then U_2, ...).
  std::vector<Index> test_order() const;
};

/// Splits the training inputs along their first principal axis into M
/// contiguous runs whose sizes differ by at most one, then assigns every
/// test input to the block with the nearest centroid (ties go to the lower
/// block index). Deterministic in its inputs.
BlockPartition partition_inputs(const Dataset &train, const Matrix &test,
                                int blocks);

/// Assigns test inputs to the nearest centroid of `p`, replacing
/// p.test_blocks.
void assign_test_blocks(BlockPartition &p, const Matrix &test);

/// Randomly chosen subset of the training inputs.
struct SupportSet {
  std::vector<Index> indices; // sorted training row indices
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(indices.size()); }
  /// Points of the support set. By default they get their own identities,
  /// so no noise term is shared with the training points they were drawn
  /// from. `shared_identity` keeps the training identities instead.
  PointSet points(const Matrix &train_inputs,
                  bool shared_identity = false) const;
};

/// Uniform sample of `size` training rows without replacement.
SupportSet select_support(const Dataset &train, Index size,
                          std::uint64_t seed);

/// Point sets of a partitioned problem, ready for covariance evaluation.
struct BlockedData {
  std::vector<PointSet> train;  // D_m
  std::vector<Vector> outputs;  // y_{D_m}
  std::vector<PointSet> test;   // U_m
  PointSet support;             // S
  std::vector<Index> test_order; // original test index of each block-ordered row

  int blocks() const { return static_cast<int>(train.size()); }
  Index test_count() const { return static_cast<Index>(test_order.size()); }
};

BlockedData make_blocked(const Dataset &train, const Matrix &test,
                         const BlockPartition &p, const SupportSet &s,
                         bool shared_support_identity = false);

} // namespace lmagp

#endif // LMAGP_PARTITION_HPP_
