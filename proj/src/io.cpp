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

#include "lmagp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lmagp/errors.hpp"

namespace lmagp {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ','))
    out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path + " for writing");
  return os;
}

} // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset load_csv(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw DataFormatError(path, 0, "cannot open file");
  std::string line;
  long lineno = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty())
    throw DataFormatError(path, lineno, "missing header");
  Index d = 0;
  while (d < static_cast<Index>(header.size()) &&
         header[d] == "x" + std::to_string(d + 1))
    ++d;
  const bool has_y = d + 1 == static_cast<Index>(header.size()) &&
                     header[d] == "y";
  if (d == 0 || (d != static_cast<Index>(header.size()) && !has_y))
    throw DataFormatError(path, lineno,
                          "header must be x1,...,xd with an optional y");
  const std::size_t width = header.size();

  std::vector<double> values;
  Index rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    const auto cells = split(line);
    if (cells.size() != width)
      throw DataFormatError(path, lineno,
                            "expected " + std::to_string(width) +
                                " columns, found " +
                                std::to_string(cells.size()));
    for (std::size_t c = 0; c < width; ++c) {
      const std::string &cell = cells[c];
      double v = 0.0;
      const auto res =
          std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() ||
          res.ptr != cell.data() + cell.size())
        throw DataFormatError(path, lineno,
                              "non-numeric value '" + cell + "' in column " +
                                  header[c]);
      if (!std::isfinite(v))
        throw DataFormatError(path, lineno,
                              "non-finite value in column " + header[c]);
      values.push_back(v);
    }
    ++rows;
  }

  Dataset out;
  out.inputs.resize(rows, d);
  if (has_y)
    out.outputs.resize(rows);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < d; ++c)
      out.inputs(r, c) = values[static_cast<std::size_t>(r) * width + c];
    if (has_y)
      out.outputs(r) = values[static_cast<std::size_t>(r) * width + d];
  }
  return out;
}

void write_csv(const std::string &path, const Dataset &data) {
  auto os = open_out(path);
  for (Index c = 0; c < data.dimension(); ++c)
    os << (c ? "," : "") << 'x' << c + 1;
  if (data.has_outputs())
    os << ",y";
  os << '\n';
  for (Index r = 0; r < data.size(); ++r) {
    for (Index c = 0; c < data.dimension(); ++c)
      os << (c ? "," : "") << format_double(data.inputs(r, c));
    if (data.has_outputs())
      os << ',' << format_double(data.outputs(r));
    os << '\n';
  }
}

void write_predictions(const std::string &path, const Matrix &inputs,
                       const Prediction &p) {
  if (p.mean.size() != inputs.rows() || p.variance.size() != inputs.rows())
    throw InvalidArgument("prediction does not match the test inputs");
  auto os = open_out(path);
  for (Index c = 0; c < inputs.cols(); ++c)
    os << 'x' << c + 1 << ',';
  os << "mean,var\n";
  for (Index r = 0; r < inputs.rows(); ++r) {
    for (Index c = 0; c < inputs.cols(); ++c)
      os << format_double(inputs(r, c)) << ',';
    os << format_double(p.mean(r)) << ',' << format_double(p.variance(r))
       << '\n';
  }
}

void write_matrix(const std::string &path, const Matrix &m) {
  auto os = open_out(path);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c)
      os << (c ? "," : "") << format_double(m(r, c));
    os << '\n';
  }
}

void write_table(const std::string &path,
                 const std::vector<std::string> &header,
                 const std::vector<std::vector<std::string>> &rows) {
  auto os = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto &row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

} // namespace lmagp
