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

#ifndef LMAGP_KERNEL_HPP_
#define LMAGP_KERNEL_HPP_

#include "lmagp/types.hpp"

namespace lmagp {

/// Squared exponential covariance with i.i.d. observation noise and a
/// constant prior mean.
struct Hyperparams {
  double signal_var = 1.0;
  double noise_var = 0.0;
  Vector lengthscales;
  double prior_mean = 0.0;

  /// Throws InvalidArgument unless the invariants hold for dimension `d`.
  void validate(Index d) const;
  Index dimension() const { return lengthscales.size(); }

  /// Convenience constructor for isotropic length-scales.
  static Hyperparams isotropic(Index d, double lengthscale, double signal_var,
                               double noise_var, double prior_mean = 0.0);
};

/// Covariance between two inputs. `same_point` says whether both refer to
/// the same observation, in which case the noise variance is added.
double kernel_eval(const InputPoint &a, const InputPoint &b,
                   const Hyperparams &h, bool same_point);

/// |A| x |B| covariance matrix. Empty sets give empty matrices.
Matrix gram(const PointSet &a, const PointSet &b, const Hyperparams &h);

/// Diagonal of gram(a, a) without forming the full matrix.
Vector gram_diagonal(const PointSet &a, const Hyperparams &h);

} // namespace lmagp

#endif // LMAGP_KERNEL_HPP_
