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

#include "lmagp/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lmagp/errors.hpp"
#include "lmagp/io.hpp"

namespace lmagp {

double rmse(const Vector &pred_mean, const Vector &truth) {
  if (pred_mean.size() != truth.size())
    throw InvalidArgument("rmse: length mismatch");
  if (pred_mean.size() == 0)
    throw InvalidArgument("rmse: empty input");
  double sum = 0.0;
  for (Index i = 0; i < truth.size(); ++i) {
    const double e = truth(i) - pred_mean(i);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

void MetricsReport::set(const std::string &key, const std::string &value) {
  for (auto &kv : entries_)
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  entries_.emplace_back(key, value);
}

void MetricsReport::set(const std::string &key, double value) {
  set(key, format_double(value));
}

void MetricsReport::set(const std::string &key, long long value) {
  set(key, std::to_string(value));
}

std::string MetricsReport::get(const std::string &key) const {
  for (const auto &kv : entries_)
    if (kv.first == key)
      return kv.second;
  return "";
}

std::string MetricsReport::to_string() const {
  std::ostringstream os;
  for (const auto &kv : entries_)
    os << kv.first << '=' << kv.second << '\n';
  return os.str();
}

void MetricsReport::write(const std::string &path) const {
  std::ofstream os(path);
  if (!os)
    throw Error("cannot open " + path + " for writing");
  os << to_string();
}

} // namespace lmagp
