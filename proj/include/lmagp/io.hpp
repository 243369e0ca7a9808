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

#ifndef LMAGP_IO_HPP_
#define LMAGP_IO_HPP_

#include <string>
#include <vector>

#include "lmagp/baselines.hpp"
#include "lmagp/types.hpp"

namespace lmagp {

/// Reads a CSV file with header `x1,...,xd` and an optional trailing `y`
/// column. Blank lines are skipped. Throws DataFormatError with the 1-based
/// line number for malformed or non-finite cells and ragged rows.
Dataset load_csv(const std::string &path);

/// Writes `x1,...,xd[,y]` with 17 significant digits.
void write_csv(const std::string &path, const Dataset &data);

/// Writes `x1,...,xd,mean,var`, one row per test input in input order.
void write_predictions(const std::string &path, const Matrix &inputs,
                       const Prediction &p);

/// Writes a dense matrix without a header.
void write_matrix(const std::string &path, const Matrix &m);

/// Writes a table with a header row.
void write_table(const std::string &path,
                 const std::vector<std::string> &header,
                 const std::vector<std::vector<std::string>> &rows);

/// 17-significant-digit rendering of a double.
std::string format_double(double v);

} // namespace lmagp

#endif // LMAGP_IO_HPP_
