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

#ifndef LMAGP_SYNTHETIC_HPP_
#define LMAGP_SYNTHETIC_HPP_

#include <cstdint>

#include "lmagp/kernel.hpp"
#include "lmagp/partition.hpp"
#include "lmagp/types.hpp"

namespace lmagp {

/// One-dimensional toy problem: y = 1 + cos(x) + 0.1 eps on [-5, 5], with
/// the same number of uniform inputs in each quarter of the interval.
namespace toy {

inline constexpr double lower = -5.0;
inline constexpr double upper = 5.0;
inline constexpr Index per_block = 100;
inline constexpr int blocks = 4;
inline constexpr int markov_order = 1;
inline constexpr Index support_size = 16;

double truth(double x);
Hyperparams hyperparams();
/// Training inputs sorted in ascending order.
Dataset generate(std::uint64_t seed);
/// Evenly spaced points from lower to upper.
Matrix grid(double spacing);
/// Blocks split at -2.5, 0 and 2.5, for both training and test inputs.
BlockPartition partition(const Dataset &train, const Matrix &test);
int block_of(double x);

} // namespace toy

/// Training and test sets drawn jointly from a GP prior.
struct GpSample {
  Dataset train;
  Dataset test; // outputs hold the noisy observations
};

/// Inputs uniform on [lo, hi]^d and noisy outputs sampled from the GP
/// with hyperparameters `h`. The joint draw is exact up to
/// `exact_limit` points; larger draws proceed in chunks ordered along the
/// first coordinate, each conditioned on the previous chunk.
GpSample sample_gp(Index n_train, Index n_test, const Hyperparams &h,
                   double lo, double hi, std::uint64_t seed,
                   Index exact_limit = 4000, Index chunk = 2000);

} // namespace lmagp

#endif // LMAGP_SYNTHETIC_HPP_
