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

#include "lmagp/types.hpp"

#include "lmagp/errors.hpp"

namespace lmagp {

PointSet PointSet::from_rows(const Matrix &inputs, std::span<const Index> rows,
                             PointDomain domain) {
  PointSet out;
  out.coords.resize(static_cast<Index>(rows.size()), inputs.cols());
  out.ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= inputs.rows()) {
      throw InvalidArgument("PointSet::from_rows: row " + std::to_string(r) +
                            " out of range");
    }
    out.coords.row(static_cast<Index>(i)) = inputs.row(r);
    out.ids.push_back({domain, r});
  }
  return out;
}

PointSet PointSet::all(const Matrix &inputs, PointDomain domain) {
  PointSet out;
  out.coords = inputs;
  out.ids.reserve(static_cast<std::size_t>(inputs.rows()));
  for (Index r = 0; r < inputs.rows(); ++r) {
    out.ids.push_back({domain, r});
  }
  return out;
}

PointSet PointSet::concat(std::span<const PointSet> parts) {
  Index rows = 0;
  Index dim = -1;
  for (const auto &p : parts) {
    if (p.size() == 0) {
      continue;
    }
    if (dim >= 0 && p.dimension() != dim) {
      throw InvalidArgument("PointSet::concat: dimension mismatch");
    }
    dim = p.dimension();
    rows += p.size();
  }
  PointSet out;
  if (dim < 0) {
    // All parts empty: keep whatever dimension the first part advertises.
    out.coords.resize(0, parts.empty() ? 0 : parts.front().dimension());
    return out;
  }
  out.coords.resize(rows, dim);
  out.ids.reserve(static_cast<std::size_t>(rows));
  Index at = 0;
  for (const auto &p : parts) {
    if (p.size() == 0) {
      continue;
    }
    out.coords.middleRows(at, p.size()) = p.coords;
    out.ids.insert(out.ids.end(), p.ids.begin(), p.ids.end());
    at += p.size();
  }
  return out;
}

PointSet PointSet::concat(std::initializer_list<const PointSet *> parts) {
  std::vector<PointSet> copies;
  copies.reserve(parts.size());
  for (const PointSet *p : parts) {
    copies.push_back(*p);
  }
  return concat(std::span<const PointSet>(copies));
}

} // namespace lmagp
