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

#ifndef LMAGP_METRICS_HPP_
#define LMAGP_METRICS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "lmagp/types.hpp"

namespace lmagp {

/// Root mean square error between predictions and observed outputs.
double rmse(const Vector &pred_mean, const Vector &truth);

/// Ordered key=value report.
class MetricsReport {
public:
  void set(const std::string &key, const std::string &value);
  void set(const std::string &key, double value);
  void set(const std::string &key, long long value);

  /// Empty string when the key is absent.
  std::string get(const std::string &key) const;
  const std::vector<std::pair<std::string, std::string>> &entries() const {
    return entries_;
  }

  std::string to_string() const;
  void write(const std::string &path) const;

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace lmagp

#endif // LMAGP_METRICS_HPP_
