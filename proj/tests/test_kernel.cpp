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

#include <cmath>

#include <doctest.h>
#include <Eigen/Eigenvalues>

#include "lmagp/errors.hpp"
#include "lmagp/kernel.hpp"
#include "test_support.hpp"

using namespace lmagp;
using namespace lmagp::testing;

namespace {

InputPoint pt(std::initializer_list<double> v) {
  InputPoint p(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v)
    p(i++) = x;
  return p;
}

} // namespace

TEST_CASE("kernel_eval at the same observation adds the noise variance") {
  const Hyperparams h = Hyperparams::isotropic(1, 1.227, 0.6836 * 0.6836,
                                               0.0939 * 0.0939);
  const double v = kernel_eval(pt({0.3}), pt({0.3}), h, true);
  CHECK(v == doctest::Approx(0.47612617).epsilon(1e-8));
  // Same coordinates, different observations: no noise term.
  CHECK(kernel_eval(pt({0.3}), pt({0.3}), h, false) ==
        doctest::Approx(0.6836 * 0.6836));
}

TEST_CASE("kernel_eval decays to zero for distant points") {
  const Hyperparams h = Hyperparams::isotropic(2, 1.0, 2.0, 0.5);
  CHECK(kernel_eval(pt({0, 0}), pt({100, -100}), h, false) == 0.0);
}

TEST_CASE("kernel_eval one length-scale apart") {
  const Hyperparams h = Hyperparams::isotropic(1, 0.7, 1.3, 0.2);
  CHECK(kernel_eval(pt({1.0}), pt({1.7}), h, false) ==
        doctest::Approx(1.3 * std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("kernel_eval rejects dimension mismatch") {
  const Hyperparams h = Hyperparams::isotropic(2, 1.0, 1.0, 0.0);
  CHECK_THROWS_AS(kernel_eval(pt({1.0}), pt({1.0, 2.0}), h, false),
                  InvalidArgument);
  CHECK_THROWS_AS(kernel_eval(pt({1.0}), pt({1.0}), h, false),
                  InvalidArgument);
}

TEST_CASE("Hyperparams validation") {
  Hyperparams h = Hyperparams::isotropic(2, 1.0, 1.0, 0.1);
  CHECK_NOTHROW(h.validate(2));
  CHECK_THROWS_AS(h.validate(3), InvalidArgument);
  h.signal_var = 0.0;
  CHECK_THROWS_AS(h.validate(2), InvalidArgument);
  h.signal_var = 1.0;
  h.noise_var = -1e-3;
  CHECK_THROWS_AS(h.validate(2), InvalidArgument);
  h.noise_var = 0.0;
  h.lengthscales(1) = 0.0;
  CHECK_THROWS_AS(h.validate(2), InvalidArgument);
}

TEST_CASE("gram of a set with itself") {
  const Hyperparams h = Hyperparams::isotropic(3, 1.1, 0.9, 0.05);
  const PointSet a = PointSet::all(random_inputs(7, 3, 1), PointDomain::train);
  const Matrix k = gram(a, a, h);
  CHECK(k.rows() == 7);
  CHECK(k == k.transpose());
  for (Index i = 0; i < 7; ++i)
    CHECK(k(i, i) == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("gram(A, B) is the transpose of gram(B, A)") {
  const Hyperparams h = random_hyper(2, 3);
  const PointSet a = PointSet::all(random_inputs(2, 2, 4), PointDomain::train);
  const PointSet b = PointSet::all(random_inputs(3, 2, 5), PointDomain::test);
  const Matrix ab = gram(a, b, h);
  CHECK(ab.rows() == 2);
  CHECK(ab.cols() == 3);
  CHECK(ab == gram(b, a, h).transpose());
}

TEST_CASE("gram with noise is bounded below by the noise variance") {
  const Hyperparams h = Hyperparams::isotropic(2, 1.0, 1.0, 0.01);
  const PointSet a = PointSet::all(random_inputs(5, 2, 9), PointDomain::train);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram(a, a, h));
  CHECK(eig.eigenvalues().minCoeff() >= 0.01 - 1e-12);
}

TEST_CASE("gram of empty sets is empty") {
  const Hyperparams h = Hyperparams::isotropic(2, 1.0, 1.0, 0.01);
  const PointSet a = PointSet::all(random_inputs(4, 2, 9), PointDomain::train);
  const PointSet e = PointSet::all(Matrix(0, 2), PointDomain::test);
  CHECK(gram(a, e, h).rows() == 4);
  CHECK(gram(a, e, h).cols() == 0);
  CHECK(gram(e, a, h).rows() == 0);
}

TEST_CASE("duplicated coordinates do not share noise") {
  Matrix x(2, 1);
  x << 0.5, 0.5;
  const Hyperparams h = Hyperparams::isotropic(1, 1.0, 1.0, 0.3);
  const PointSet a = PointSet::all(x, PointDomain::train);
  const Matrix k = gram(a, a, h);
  CHECK(k(0, 1) == 1.0);
  CHECK(k(0, 0) == doctest::Approx(1.3));
  // Training and test copies of a point are different observations.
  const PointSet t = PointSet::all(x, PointDomain::test);
  CHECK(gram(a, t, h)(0, 0) == 1.0);
}

TEST_CASE("property: kernel symmetry") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Hyperparams h = random_hyper(3, seed);
    const Matrix x = random_inputs(2, 3, seed + 100);
    const InputPoint a = x.row(0).transpose(), b = x.row(1).transpose();
    CHECK(kernel_eval(a, b, h, false) == kernel_eval(b, a, h, false));
  }
}

TEST_CASE("property: self-gram is positive definite with noise") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Hyperparams h = random_hyper(2, seed);
    const PointSet a =
        PointSet::all(random_inputs(12, 2, seed + 7), PointDomain::train);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram(a, a, h));
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("property: doubling length-scales equals halving inputs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Hyperparams h = random_hyper(2, seed);
    Hyperparams h2 = h;
    h2.lengthscales *= 2.0;
    const Matrix x = random_inputs(2, 2, seed + 40);
    const InputPoint a = x.row(0).transpose(), b = x.row(1).transpose();
    const double lhs = kernel_eval(a, b, h2, false);
    const double rhs = kernel_eval(a / 2.0, b / 2.0, h, false);
    CHECK(std::abs(lhs - rhs) <= 1e-15 * std::max(1.0, std::abs(rhs)));
  }
}
