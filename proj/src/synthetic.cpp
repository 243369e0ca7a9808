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

#include "lmagp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lmagp/blockmat.hpp"
#include "lmagp/errors.hpp"

namespace lmagp {

namespace toy {

double truth(double x) { return 1.0 + std::cos(x); }

Hyperparams hyperparams() {
  return Hyperparams::isotropic(1, 1.2270, 0.6836 * 0.6836, 0.0939 * 0.0939,
                                1.1072);
}

Dataset generate(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double width = (upper - lower) / blocks;
  std::vector<double> xs;
  for (int m = 0; m < blocks; ++m) {
    std::uniform_real_distribution<double> u(lower + m * width,
                                             lower + (m + 1) * width);
    for (Index i = 0; i < per_block; ++i)
      xs.push_back(u(rng));
  }
  std::sort(xs.begin(), xs.end());
  Dataset d;
  d.inputs.resize(static_cast<Index>(xs.size()), 1);
  d.outputs.resize(static_cast<Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d.inputs(static_cast<Index>(i), 0) = xs[i];
    d.outputs(static_cast<Index>(i)) = truth(xs[i]) + 0.1 * noise(rng);
  }
  return d;
}

Matrix grid(double spacing) {
  const Index n =
      static_cast<Index>(std::llround((upper - lower) / spacing)) + 1;
  Matrix g(n, 1);
  for (Index i = 0; i < n; ++i)
    g(i, 0) = lower + static_cast<double>(i) * spacing;
  return g;
}

int block_of(double x) {
  const double width = (upper - lower) / blocks;
  const int m = static_cast<int>(std::floor((x - lower) / width));
  return std::clamp(m, 0, blocks - 1);
}

BlockPartition partition(const Dataset &train, const Matrix &test) {
  BlockPartition p;
  p.train_blocks.resize(blocks);
  p.test_blocks.resize(blocks);
  p.centroids = Matrix::Zero(blocks, 1);
  for (Index i = 0; i < train.size(); ++i)
    p.train_blocks[block_of(train.inputs(i, 0))].push_back(i);
  for (Index i = 0; i < test.rows(); ++i)
    p.test_blocks[block_of(test(i, 0))].push_back(i);
  for (int m = 0; m < blocks; ++m) {
    if (p.train_blocks[m].empty())
      throw InvalidArgument("toy block without training points");
    for (Index i : p.train_blocks[m])
      p.centroids(m, 0) += train.inputs(i, 0);
    p.centroids(m, 0) /= static_cast<double>(p.train_blocks[m].size());
  }
  return p;
}

} // namespace toy

namespace {

Vector standard_normal(Index n, std::mt19937_64 &rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v(i) = z(rng);
  return v;
}

} // namespace

GpSample sample_gp(Index n_train, Index n_test, const Hyperparams &h,
                   double lo, double hi, std::uint64_t seed,
                   Index exact_limit, Index chunk) {
  const Index d = h.dimension();
  h.validate(d);
  if (n_train < 1 || n_test < 0 || !(hi > lo) || chunk < 1)
    throw InvalidArgument("sample_gp: invalid sizes or bounds");
  const Index n = n_train + n_test;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < d; ++c)
      x(i, c) = u(rng);

  Vector y(n);
  if (n <= exact_limit) {
    const PointSet all = PointSet::all(x, PointDomain::train);
    const Cholesky f = cholesky_jittered(gram(all, all, h));
    y = f.matrix_l() * standard_normal(n, rng);
  } else {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return x(a, 0) < x(b, 0); });
    PointSet prev;
    Vector prev_y;
    for (Index start = 0; start < n; start += chunk) {
      const Index len = std::min(chunk, n - start);
      const PointSet cur = PointSet::from_rows(
          x, std::span<const Index>(order.data() + start,
                                    static_cast<std::size_t>(len)),
          PointDomain::train);
      Matrix cov = gram(cur, cur, h);
      Vector mean = Vector::Zero(len);
      if (prev.size() > 0) {
        const Cholesky fp = cholesky_jittered(gram(prev, prev, h));
        const Matrix cross = gram(prev, cur, h);
        const Matrix w = fp.solve_lower(cross);
        mean = cross.transpose() * fp.solve(prev_y);
        cov -= w.transpose() * w;
        cov = (0.5 * (cov + cov.transpose())).eval();
      }
      const Cholesky fc = cholesky_jittered(cov);
      const Vector draw = mean + fc.matrix_l() * standard_normal(len, rng);
      for (Index i = 0; i < len; ++i)
        y(order[start + i]) = draw(i);
      prev = cur;
      prev_y = draw;
    }
  }
  y.array() += h.prior_mean;

  GpSample s;
  s.train.inputs = x.topRows(n_train);
  s.train.outputs = y.head(n_train);
  s.test.inputs = x.bottomRows(n_test);
  s.test.outputs = y.tail(n_test);
  return s;
}

} // namespace lmagp
