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

#ifndef LMAGP_TESTS_TEST_SUPPORT_HPP_
#define LMAGP_TESTS_TEST_SUPPORT_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/LU>

#include "lmagp/baselines.hpp"
#include "lmagp/kernel.hpp"
#include "lmagp/lma.hpp"

namespace lmagp::testing {

/// Inputs uniform on [0, 5]^d with outputs sin(sum x) + noise.
Dataset random_dataset(Index n, Index d, std::uint64_t seed);
Matrix random_inputs(Index n, Index d, std::uint64_t seed);
Hyperparams random_hyper(Index d, std::uint64_t seed);
Matrix random_spd(Index n, std::uint64_t seed, double floor = 0.1);
Vector random_vector(Index n, std::uint64_t seed);

/// A fully prepared random instance.
struct Instance {
  Dataset train;
  Matrix test;
  Hyperparams h;
  LmaConfig config;
};
Instance random_instance(Index n, Index n_test, Index d, int blocks, int b,
                         Index support, std::uint64_t seed);
LmaContext make_context(const Instance &inst);

double max_abs(const Matrix &m);
double max_abs_diff(const Matrix &a, const Matrix &b);
/// max|a-b| / max(1, max|b|).
double rel_diff(const Matrix &a, const Matrix &b);

/// Sigma_{AS} Sigma_SS^{-1} Sigma_{SB} with an explicit inverse.
Matrix explicit_q(const PointSet &a, const PointSet &b, const PointSet &s,
                  const Hyperparams &h);
Matrix explicit_r(const PointSet &a, const PointSet &b, const PointSet &s,
                  const Hyperparams &h);

/// KL distance evaluated literally with explicit inverse and determinants.
double kl_direct(const Matrix &r, const Matrix &rhat);

/// Inverse of the residual approximation built from explicit per-block
/// conditionals: sum_m A_m^T (R_mm - R' R_{B m})^{-1} A_m with
/// A_m = [.. I .. -R' ..]. Independent of the recursion.
Matrix rbar_inverse_oracle(const LmaContext &ctx);

/// Random SPD matrix whose inverse has B-block-banded structure, built from
/// a random upper block factor with the banded sparsity pattern.
Matrix random_banded_inverse_spd(const std::vector<Index> &sizes, int b,
                                 std::uint64_t seed);

/// Gaussian conditioning with an explicit inverse, in block order.
Prediction explicit_condition(const Matrix &sigma_dd, const Matrix &sigma_ud,
                              const Matrix &sigma_uu, const Vector &resid,
                              double mu);

} // namespace lmagp::testing

#endif // LMAGP_TESTS_TEST_SUPPORT_HPP_
