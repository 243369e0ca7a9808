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

#include "lmagp/blockmat.hpp"
#include "lmagp/errors.hpp"
#include "lmagp/lma.hpp"
#include "test_support.hpp"

using namespace lmagp;
using namespace lmagp::testing;

namespace {

PointSet train_set(Index n, Index d, std::uint64_t seed) {
  return PointSet::all(random_inputs(n, d, seed), PointDomain::train);
}

double min_eig(const Matrix &m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  return eig.eigenvalues().minCoeff();
}

} // namespace

TEST_CASE("q_matrix on the support set reproduces its covariance") {
  const Hyperparams h = random_hyper(2, 1);
  const PointSet s = train_set(5, 2, 2);
  CHECK(rel_diff(q_matrix(s, s, s, h), gram(s, s, h)) < 1e-10);
}

TEST_CASE("q_matrix with a single support point") {
  const Hyperparams h = random_hyper(1, 3);
  Matrix xs(1, 1), xx(1, 1);
  xs << 0.4;
  xx << 1.1;
  const PointSet s = PointSet::all(xs, PointDomain::support);
  const PointSet x = PointSet::all(xx, PointDomain::train);
  const double sxs = gram(x, s, h)(0, 0);
  const double sss = gram(s, s, h)(0, 0);
  CHECK(q_matrix(x, x, s, h)(0, 0) ==
        doctest::Approx(sxs * sxs / sss).epsilon(1e-13));
}

TEST_CASE("q_matrix agrees with the explicit-inverse formula") {
  const Hyperparams h = random_hyper(2, 4);
  const Matrix all = random_inputs(6, 2, 5);
  const PointSet a = PointSet::all(all, PointDomain::train);
  const std::vector<Index> rows{0, 2, 4};
  const PointSet s = PointSet::from_rows(all, rows, PointDomain::support);
  CHECK(max_abs_diff(q_matrix(a, a, s, h), explicit_q(a, a, s, h)) < 1e-10);
}

TEST_CASE("r_matrix vanishes on the support set") {
  const Hyperparams h = random_hyper(2, 6);
  const PointSet s = train_set(4, 2, 7);
  CHECK(max_abs(r_matrix(s, s, s, h)) < 1e-10);
}

TEST_CASE("r_matrix requires a support set") {
  const Hyperparams h = random_hyper(2, 6);
  const PointSet a = train_set(3, 2, 7);
  const PointSet empty = PointSet::all(Matrix(0, 2), PointDomain::support);
  CHECK_THROWS_AS(r_matrix(a, a, empty, h), InvalidArgument);
  CHECK_THROWS_AS(q_matrix(a, a, empty, h), InvalidArgument);
}

TEST_CASE("r_matrix is positive semidefinite") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Hyperparams h = random_hyper(2, seed);
    const PointSet a = train_set(5, 2, seed + 10);
    const PointSet s =
        PointSet::all(random_inputs(2, 2, seed + 20), PointDomain::support);
    CHECK(min_eig(r_matrix(a, a, s, h)) >= -1e-10);
  }
}

TEST_CASE("coincident support points are rescued by jitter") {
  Matrix xs(3, 1);
  xs << 0.0, 0.0, 0.0;
  Hyperparams h = Hyperparams::isotropic(1, 1.0, 1.0, 0.0);
  // Three support identities at one location and no noise: rank one.
  const PointSet s = PointSet::all(xs, PointDomain::support);
  CHECK_NOTHROW(SupportProjector(s, h));
}

TEST_CASE("cholesky_jittered of the identity") {
  reset_jitter_stats();
  const Cholesky f = cholesky_jittered(Matrix::Identity(3, 3));
  CHECK(f.jitter() == 0.0);
  CHECK(f.matrix_l() == Matrix::Identity(3, 3));
  CHECK(jitter_stats().factorizations == 1);
  CHECK(jitter_stats().jittered == 0);
}

TEST_CASE("cholesky_jittered rescues a rank-one matrix") {
  reset_jitter_stats();
  Vector v(4);
  v << 1.0, -2.0, 0.5, 3.0;
  const Matrix a = v * v.transpose();
  const Cholesky f = cholesky_jittered(a);
  CHECK(f.jitter() > 0.0);
  const Matrix l = f.matrix_l();
  CHECK(max_abs(l * l.transpose() - a) <= 10.0 * f.jitter());
  CHECK(jitter_stats().jittered == 1);
  CHECK(jitter_stats().max_jitter == f.jitter());
}

TEST_CASE("cholesky_jittered gives up on an indefinite matrix") {
  Vector spectrum(3);
  spectrum << 2.0, 1.0, -1.0;
  const Matrix q = random_spd(3, 1).householderQr().householderQ();
  const Matrix a = q * spectrum.asDiagonal() * q.transpose();
  CHECK_THROWS_AS(cholesky_jittered(a), NotPositiveDefinite);
}

TEST_CASE("cholesky_jittered rejects non-square input") {
  CHECK_THROWS_AS(cholesky_jittered(Matrix::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("property: cholesky round trip") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Matrix a = random_spd(4 + seed % 9, seed, 1e-3);
    const Cholesky f = cholesky_jittered(a);
    const Matrix l = f.matrix_l();
    Matrix shifted = a;
    shifted.diagonal().array() += f.jitter();
    CHECK(max_abs(l * l.transpose() - shifted) <= 1e-10 * max_abs(a));
    const Vector b = random_vector(a.rows(), seed + 1);
    CHECK(max_abs(a * f.solve(b) - b) < 1e-8);
    CHECK(f.log_determinant() ==
          doctest::Approx(std::log(a.determinant())).epsilon(1e-10));
  }
}

TEST_CASE("kl_distance of identical matrices is zero") {
  const Matrix r = random_spd(5, 3);
  CHECK(std::abs(kl_distance(r, r)) < 1e-12);
}

TEST_CASE("kl_distance in one dimension") {
  Matrix r(1, 1), rh(1, 1);
  r << 2.0;
  rh << 1.0;
  CHECK(kl_distance(r, rh) ==
        doctest::Approx(0.5 * (2.0 - std::log(2.0) - 1.0)).epsilon(1e-14));
  CHECK(kl_distance(r, rh) == doctest::Approx(0.15343).epsilon(1e-4));
}

TEST_CASE("kl_distance agrees with the literal formula") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix r = random_spd(4, seed);
    const Matrix rh = random_spd(4, seed + 50);
    CHECK(std::abs(kl_distance(r, rh) - kl_direct(r, rh)) < 1e-12);
    CHECK(kl_distance(r, rh) >= 0.0);
  }
}

TEST_CASE("kl_distance input checks") {
  CHECK_THROWS_AS(kl_distance(random_spd(3, 1), random_spd(4, 1)),
                  InvalidArgument);
  CHECK_THROWS_AS(kl_distance(random_spd(3, 1), -random_spd(3, 2)),
                  NotPositiveDefinite);
}

TEST_CASE("BlockMatrix flattening round trip") {
  const Matrix dense = random_spd(7, 4);
  const BlockMatrix b = BlockMatrix::from_dense(dense, {3, 0, 4}, {2, 5});
  CHECK(b.block(0, 1).rows() == 3);
  CHECK(b.block(0, 1).cols() == 5);
  CHECK(b.block(1, 0).rows() == 0);
  CHECK(b.to_dense() == dense);
  BlockMatrix z({1, 2}, {2});
  CHECK_THROWS_AS(z.set_block(0, 0, Matrix::Zero(2, 2)), InvalidArgument);
  CHECK_THROWS_AS(z.block(2, 0), InvalidArgument);
  CHECK_THROWS_AS(BlockMatrix::from_dense(dense, {3, 3}, {7}),
                  InvalidArgument);
}

TEST_CASE("upper_inverse_factor") {
  const Matrix c = random_spd(6, 8);
  const Matrix u = upper_inverse_factor(c);
  CHECK(max_abs(Matrix(u.triangularView<Eigen::StrictlyLower>())) == 0.0);
  CHECK(max_abs_diff(u.transpose() * u, c.inverse()) < 1e-10);
}

namespace {

LmaContext context(Index n, int blocks, int b, Index s, std::uint64_t seed) {
  return make_context(random_instance(n, 5, 2, blocks, b, s, seed));
}

} // namespace

TEST_CASE("banded_inverse_cholesky with full bandwidth inverts R_DD") {
  const LmaContext ctx = context(40, 2, 1, 5, 11);
  const BandedBlockFactor u =
      banded_inverse_cholesky(ctx.data().train, ctx.projector(), 1);
  const PointSet d = ctx.all_train();
  const Matrix r = ctx.projector().r(d, d);
  const Matrix ud = u.to_dense();
  CHECK(rel_diff(ud.transpose() * ud, r.inverse()) < 1e-8);
}

TEST_CASE("banded_inverse_cholesky last block has no blanket") {
  const LmaContext ctx = context(36, 3, 1, 4, 12);
  const BandedBlockFactor u =
      banded_inverse_cholesky(ctx.data().train, ctx.projector(), 1);
  const int last = ctx.blocks() - 1;
  CHECK(u.in_band(last, last));
  CHECK_FALSE(u.in_band(last, last + 1));
  const PointSet &dm = ctx.train_block(last);
  const Matrix umm = u.block(last, last);
  CHECK(rel_diff(umm.transpose() * umm,
                 ctx.projector().r(dm, dm).inverse()) < 1e-8);
}

TEST_CASE("banded_inverse_cholesky zero pattern and product") {
  const LmaContext ctx = context(60, 4, 1, 6, 13);
  const BandedBlockFactor u =
      banded_inverse_cholesky(ctx.data().train, ctx.projector(), 1);
  const auto sizes = ctx.train_sizes();
  const auto off = block_offsets(sizes);
  const Matrix ud = u.to_dense();
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      const bool stored = n >= m && n - m <= 1;
      CHECK(u.in_band(m, n) == stored);
      if (!stored) {
        CHECK(max_abs(ud.block(off[m], off[n], sizes[m], sizes[n])) == 0.0);
        CHECK_THROWS_AS(u.block(m, n), InvalidArgument);
      }
    }
  // Diagonal blocks are upper triangular.
  for (int m = 0; m < 4; ++m)
    CHECK(max_abs(Matrix(
              u.block(m, m).triangularView<Eigen::StrictlyLower>())) == 0.0);
  const Matrix prod = ud.transpose() * ud;
  const double scale = max_abs(prod);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      if (std::abs(m - n) > 1)
        CHECK(max_abs(prod.block(off[m], off[n], sizes[m], sizes[n])) <=
              1e-9 * scale);
  CHECK(rel_diff(prod, rbar_inverse_oracle(ctx)) < 1e-8);
}

TEST_CASE("banded factor applications match the dense factor") {
  const LmaContext ctx = context(45, 3, 2, 5, 14);
  const BandedBlockFactor u =
      banded_inverse_cholesky(ctx.data().train, ctx.projector(), 2);
  const Matrix ud = u.to_dense();
  const Vector v = random_vector(ud.rows(), 3);
  CHECK(max_abs_diff(u.apply(v), ud * v) < 1e-12);
  CHECK(max_abs_diff(u.apply_transpose(v), ud.transpose() * v) < 1e-12);
  CHECK_THROWS_AS(BandedBlockFactor({2, 2}, 2), InvalidArgument);
}

TEST_CASE("property: banded inverse and trace identity") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (int b : {1, 2}) {
      const LmaContext ctx = context(48, 4, b, 6, 100 + seed);
      const Matrix rbar = assemble_rbar_train(ctx);
      const Matrix inv = rbar.inverse();
      const auto sizes = ctx.train_sizes();
      const auto off = block_offsets(sizes);
      double worst = 0.0;
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
          if (std::abs(m - n) > b)
            worst = std::max(
                worst, max_abs(inv.block(off[m], off[n], sizes[m], sizes[n])));
      CHECK(worst <= 1e-8 * max_abs(inv));

      const PointSet d = ctx.all_train();
      const Matrix r = ctx.projector().r(d, d);
      const double tr = (r * inv).trace();
      CHECK(std::abs(tr - static_cast<double>(d.size())) <=
            1e-6 * static_cast<double>(d.size()));

      const BandedBlockFactor u =
          banded_inverse_cholesky(ctx.data().train, ctx.projector(), b);
      for (std::uint64_t k = 0; k < 5; ++k) {
        const Vector v = random_vector(d.size(), seed * 10 + k);
        const Vector want = rbar.llt().solve(v);
        CHECK(max_abs_diff(u.apply_inverse(v), want) <=
              1e-8 * std::max(1.0, max_abs(want)));
      }
    }
  }
}

TEST_CASE("property: the residual approximation minimizes KL distance") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const int b = 1 + static_cast<int>(seed % 2);
    const LmaContext ctx = context(40, 4, b, 5, 200 + seed);
    const PointSet d = ctx.all_train();
    const Matrix r = ctx.projector().r(d, d);
    const double best = kl_distance(r, assemble_rbar_train(ctx));
    CHECK(best >= 0.0);
    for (std::uint64_t k = 0; k < 30; ++k) {
      const Matrix rhat =
          random_banded_inverse_spd(ctx.train_sizes(), b, seed * 100 + k);
      CHECK(kl_distance(r, rhat) >= best - 1e-9);
    }
  }
}
