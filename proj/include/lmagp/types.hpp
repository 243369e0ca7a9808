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

#ifndef LMAGP_TYPES_HPP_
#define LMAGP_TYPES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lmagp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// A single input x in the d-dimensional feature space.
using InputPoint = Eigen::VectorXd;

/// Training or test data: one row of `inputs` per point, `outputs` aligned
/// with the rows (empty when the outputs are unknown).
struct Dataset {
  Matrix inputs;
  Vector outputs;

  Index size() const { return inputs.rows(); }
  Index dimension() const { return inputs.cols(); }
  bool has_outputs() const { return outputs.size() == inputs.rows(); }
};

enum class PointDomain : std::uint8_t { train, test, support };

/// Identity of a point, used to decide when observation noise is shared.
/// Two entries of a Gram matrix receive the noise term only when they refer
/// to the same identity; equal coordinates alone are not enough.
struct PointId {
  PointDomain domain = PointDomain::train;
  Index index = 0;

  friend bool operator==(const PointId &, const PointId &) = default;
};

/// A set of points carrying both coordinates (one per row) and identities.
struct PointSet {
  Matrix coords;
  std::vector<PointId> ids;

  Index size() const { return coords.rows(); }
  Index dimension() const { return coords.cols(); }

  /// Rows `rows` of `inputs`, tagged with `domain` and their row index.
  static PointSet from_rows(const Matrix &inputs, std::span<const Index> rows,
                            PointDomain domain);
  /// Every row of `inputs`, tagged with `domain`.
  static PointSet all(const Matrix &inputs, PointDomain domain);
  /// Concatenation in argument order. All parts must share the dimension
  /// (empty parts are allowed and skipped).
  static PointSet concat(std::span<const PointSet> parts);
  static PointSet concat(std::initializer_list<const PointSet *> parts);
};

} // namespace lmagp

#endif // LMAGP_TYPES_HPP_
