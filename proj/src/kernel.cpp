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

#include "lmagp/kernel.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "lmagp/errors.hpp"

namespace lmagp {

namespace {

std::uint64_t id_key(const PointId &id) {
  return (static_cast<std::uint64_t>(id.domain) << 56) ^
         static_cast<std::uint64_t>(id.index);
}

void check_dimension(Index got, const Hyperparams &h, const char *where) {
  if (got != h.dimension()) {
    throw InvalidArgument(std::string(where) + ": input dimension " +
                          std::to_string(got) + " does not match " +
                          std::to_string(h.dimension()) + " length-scales");
  }
}

} // namespace

void Hyperparams::validate(Index d) const {
  if (!(signal_var > 0.0) || !std::isfinite(signal_var)) {
    throw InvalidArgument("signal variance must be positive");
  }
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw InvalidArgument("noise variance must be non-negative");
  }
  if (!std::isfinite(prior_mean)) {
    throw InvalidArgument("prior mean must be finite");
  }
  if (lengthscales.size() != d) {
    throw InvalidArgument("expected " + std::to_string(d) +
                          " length-scales, got " +
                          std::to_string(lengthscales.size()));
  }
  for (Index i = 0; i < d; ++i) {
    if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i])) {
      throw InvalidArgument("length-scales must be positive");
    }
  }
}

Hyperparams Hyperparams::isotropic(Index d, double lengthscale,
                                   double signal_var, double noise_var,
                                   double prior_mean) {
  Hyperparams h;
  h.signal_var = signal_var;
  h.noise_var = noise_var;
  h.lengthscales = Vector::Constant(d, lengthscale);
  h.prior_mean = prior_mean;
  return h;
}

double kernel_eval(const InputPoint &a, const InputPoint &b,
                   const Hyperparams &h, bool same_point) {
  check_dimension(a.size(), h, "kernel_eval");
  check_dimension(b.size(), h, "kernel_eval");
  double sq = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double z = (a[i] - b[i]) / h.lengthscales[i];
    sq += z * z;
  }
  return h.signal_var * std::exp(-0.5 * sq) + (same_point ? h.noise_var : 0.0);
}

Matrix gram(const PointSet &a, const PointSet &b, const Hyperparams &h) {
  if (a.size() == 0 || b.size() == 0) {
    return Matrix(a.size(), b.size());
  }
  check_dimension(a.dimension(), h, "gram");
  check_dimension(b.dimension(), h, "gram");

  const Eigen::RowVectorXd inv_ell = h.lengthscales.cwiseInverse().transpose();
  const Matrix sa = a.coords.array().rowwise() * inv_ell.array();
  const Matrix sb = b.coords.array().rowwise() * inv_ell.array();

  Matrix k(a.size(), b.size());
  for (Index j = 0; j < b.size(); ++j) {
    for (Index i = 0; i < a.size(); ++i) {
      double sq = 0.0;
      for (Index c = 0; c < sa.cols(); ++c) {
        const double z = sa(i, c) - sb(j, c);
        sq += z * z;
      }
      k(i, j) = h.signal_var * std::exp(-0.5 * sq);
    }
  }

  if (h.noise_var > 0.0) {
    std::unordered_map<std::uint64_t, Index> rows_of_a;
    rows_of_a.reserve(a.ids.size());
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
      rows_of_a.emplace(id_key(a.ids[i]), static_cast<Index>(i));
    }
    for (std::size_t j = 0; j < b.ids.size(); ++j) {
      const auto it = rows_of_a.find(id_key(b.ids[j]));
      if (it != rows_of_a.end()) {
        k(it->second, static_cast<Index>(j)) += h.noise_var;
      }
    }
  }
  return k;
}

Vector gram_diagonal(const PointSet &a, const Hyperparams &h) {
  if (a.size() > 0) {
    check_dimension(a.dimension(), h, "gram_diagonal");
  }
  return Vector::Constant(a.size(), h.signal_var + h.noise_var);
}

} // namespace lmagp
