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

#include "lmagp/lma.hpp"

#include <algorithm>
#include <string>

#include "lmagp/errors.hpp"

namespace lmagp {

namespace {

Matrix vstack(const std::vector<const Matrix *> &parts, Index cols) {
  Index rows = 0;
  for (const Matrix *p : parts)
    rows += p->rows();
  Matrix out(rows, cols);
  Index at = 0;
  for (const Matrix *p : parts) {
    out.middleRows(at, p->rows()) = *p;
    at += p->rows();
  }
  return out;
}

std::vector<Index> offsets_of(const std::vector<Index> &sizes) {
  return block_offsets(sizes);
}

} // namespace

void LmaConfig::validate() const {
  if (blocks < 1)
    throw InvalidArgument("blocks must be at least 1");
  if (markov_order < 0 || markov_order > blocks - 1)
    throw InvalidArgument("markov order must lie in [0, " +
                          std::to_string(blocks - 1) + "]");
  if (support_size < 1)
    throw InvalidArgument("support size must be at least 1");
}

LmaProblem prepare_problem(const Dataset &train, const Matrix &test,
                           const LmaConfig &config) {
  config.validate();
  LmaProblem p;
  p.partition = partition_inputs(train, test, config.blocks);
  p.support = select_support(train, config.support_size, config.support_seed);
  p.data = make_blocked(train, test, p.partition, p.support,
                        config.shared_support_identity);
  return p;
}

LmaContext::LmaContext(BlockedData data, Hyperparams hyper, int bandwidth)
    : data_(std::move(data)), hyper_(std::move(hyper)), bandwidth_(bandwidth),
      projector_(data_.support, hyper_) {
  if (data_.blocks() < 1)
    throw InvalidArgument("at least one block is required");
  if (bandwidth_ < 0 || bandwidth_ > data_.blocks() - 1)
    throw InvalidArgument("markov order must lie in [0, M-1]");
  hyper_.validate(data_.support.dimension());
  for (int m = 0; m < blocks(); ++m)
    v_.push_back(PointSet::concat({&data_.train[m], &data_.test[m]}));
}

std::pair<int, int> LmaContext::blanket_range(int m) const {
  return {m + 1, std::min(m + bandwidth_, blocks() - 1)};
}

PointSet LmaContext::blanket(int m) const {
  const auto [first, last] = blanket_range(m);
  if (first > last)
    return PointSet{Matrix(0, data_.support.dimension()), {}};
  return PointSet::concat(std::span<const PointSet>(
      data_.train.data() + first, static_cast<std::size_t>(last - first + 1)));
}

Vector LmaContext::blanket_outputs(int m) const {
  const auto [first, last] = blanket_range(m);
  Index n = 0;
  for (int k = first; k <= last; ++k)
    n += data_.outputs[k].size();
  Vector y(n);
  Index at = 0;
  for (int k = first; k <= last; ++k) {
    y.segment(at, data_.outputs[k].size()) = data_.outputs[k];
    at += data_.outputs[k].size();
  }
  return y;
}

std::vector<Index> LmaContext::train_sizes() const {
  std::vector<Index> out;
  for (const auto &b : data_.train)
    out.push_back(b.size());
  return out;
}

std::vector<Index> LmaContext::test_sizes() const {
  std::vector<Index> out;
  for (const auto &b : data_.test)
    out.push_back(b.size());
  return out;
}

Vector LmaContext::all_outputs() const {
  Index n = 0;
  for (const auto &y : data_.outputs)
    n += y.size();
  Vector out(n);
  Index at = 0;
  for (const auto &y : data_.outputs) {
    out.segment(at, y.size()) = y;
    at += y.size();
  }
  return out;
}

const Cholesky &ResidualRecursion::blanket_factor(int m) {
  auto it = factors_.find(m);
  if (it != factors_.end())
    return it->second;
  const PointSet b = ctx_.blanket(m);
  try {
    return factors_.emplace(m, cholesky_jittered(ctx_.projector().r(b, b)))
        .first->second;
  } catch (const NotPositiveDefinite &e) {
    throw BlockFactorizationError(m, e.what());
  }
}

const Matrix &ResidualRecursion::upper(int m, int n) {
  const auto key = std::make_pair(m, n);
  auto it = memo_.find(key);
  if (it != memo_.end())
    return it->second;

  const int b = ctx_.bandwidth();
  const PointSet &vm = ctx_.v_block(m);
  const PointSet &vn = ctx_.v_block(n);
  Matrix value;
  if (n - m <= b) {
    value = ctx_.projector().r(vm, vn);
  } else if (b == 0) {
    value = Matrix::Zero(vm.size(), vn.size());
  } else {
    // R_{V_m D^B_m} R_{D^B_m D^B_m}^{-1} R-bar_{D^B_m V_n}
    const auto [first, last] = ctx_.blanket_range(m);
    std::vector<Matrix> rows;
    for (int j = first; j <= last; ++j)
      rows.push_back(upper(j, n).topRows(ctx_.train_block(j).size()));
    std::vector<const Matrix *> ptrs;
    for (const auto &r : rows)
      ptrs.push_back(&r);
    const Matrix rbar_bn = vstack(ptrs, vn.size());
    const PointSet blanket = ctx_.blanket(m);
    const Matrix r_vb = ctx_.projector().r(vm, blanket);
    value = r_vb * blanket_factor(m).solve(rbar_bn);
  }
  return memo_.emplace(key, std::move(value)).first->second;
}

Matrix ResidualRecursion::block(int m, int n) {
  const int count = ctx_.blocks();
  if (m < 0 || n < 0 || m >= count || n >= count)
    throw InvalidArgument("block index out of range");
  if (m <= n)
    return upper(m, n);
  return upper(n, m).transpose();
}

Matrix ResidualRecursion::train_block(int m, int n) {
  return block(m, n).topLeftCorner(ctx_.train_block(m).size(),
                                   ctx_.train_block(n).size());
}

Matrix rbar_block(const LmaContext &ctx, int m, int n) {
  ResidualRecursion rec(ctx);
  return rec.block(m, n);
}

Matrix sigma_bar(const LmaContext &ctx, ResidualRecursion &rec, int m, int n) {
  const PointSet &vm = ctx.v_block(m);
  const PointSet &vn = ctx.v_block(n);
  if (std::abs(m - n) <= ctx.bandwidth())
    return gram(vm, vn, ctx.hyper());
  return ctx.projector().q(vm, vn) + rec.block(m, n);
}

DensePrior assemble_prior(const LmaContext &ctx, bool with_test_test) {
  ResidualRecursion rec(ctx);
  const auto ds = ctx.train_sizes();
  const auto us = ctx.test_sizes();
  const auto doff = offsets_of(ds);
  const auto uoff = offsets_of(us);
  DensePrior p;
  p.train_train.resize(doff.back(), doff.back());
  p.test_train.resize(uoff.back(), doff.back());
  if (with_test_test)
    p.test_test.resize(uoff.back(), uoff.back());
  for (int m = 0; m < ctx.blocks(); ++m)
    for (int n = 0; n < ctx.blocks(); ++n) {
      const Matrix s = sigma_bar(ctx, rec, m, n);
      p.train_train.block(doff[m], doff[n], ds[m], ds[n]) =
          s.topLeftCorner(ds[m], ds[n]);
      p.test_train.block(uoff[m], doff[n], us[m], ds[n]) =
          s.bottomLeftCorner(us[m], ds[n]);
      if (with_test_test)
        p.test_test.block(uoff[m], uoff[n], us[m], us[n]) =
            s.bottomRightCorner(us[m], us[n]);
    }
  return p;
}

Matrix assemble_rbar_train(const LmaContext &ctx) {
  ResidualRecursion rec(ctx);
  const auto ds = ctx.train_sizes();
  const auto off = offsets_of(ds);
  Matrix out(off.back(), off.back());
  for (int m = 0; m < ctx.blocks(); ++m)
    for (int n = 0; n < ctx.blocks(); ++n)
      out.block(off[m], off[n], ds[m], ds[n]) = rec.train_block(m, n);
  return out;
}

Prediction lma_predict_direct(const LmaContext &ctx, bool want_cov) {
  const DensePrior p = assemble_prior(ctx, want_cov);
  const double mu = ctx.hyper().prior_mean;
  const Vector resid = ctx.all_outputs().array() - mu;
  const Vector prior_diag = p.test_train.rows() == 0
                                ? Vector(0)
                                : gram_diagonal(ctx.all_test(), ctx.hyper());
  const Prediction blocked = gaussian_condition(
      p.train_train, p.test_train, prior_diag, want_cov ? &p.test_test : nullptr,
      resid, mu, want_cov);
  return unpermute(blocked, ctx.data().test_order);
}

Prediction lma_predict_direct(const Dataset &train, const Matrix &test,
                              const Hyperparams &h, const LmaConfig &config,
                              bool want_cov) {
  h.validate(train.dimension());
  LmaProblem problem = prepare_problem(train, test, config);
  const LmaContext ctx(std::move(problem.data), h, config.markov_order);
  return lma_predict_direct(ctx, want_cov);
}

BlanketTerms make_blanket_terms(const SupportProjector &proj,
                                const PointSet &block,
                                const PointSet &blanket) {
  BlanketTerms t;
  if (blanket.size() == 0) {
    t.r_blanket_block = Matrix(0, block.size());
    t.rprime = Matrix(block.size(), 0);
    t.blanket_factor = cholesky_jittered(Matrix(0, 0));
    return t;
  }
  t.r_blanket_block = proj.r(blanket, block);
  t.blanket_factor = cholesky_jittered(proj.r(blanket, blanket));
  t.rprime = t.blanket_factor.solve(t.r_blanket_block).transpose();
  return t;
}

Matrix sigma_bar_from_rbar(const SupportProjector &proj, const PointSet &dk,
                           int k, const std::vector<PointSet> &test_blocks,
                           const Matrix &rbar_ku, const Hyperparams &h,
                           int bandwidth) {
  Matrix out(rbar_ku.rows(), rbar_ku.cols());
  const Matrix wk = proj.whiten(dk);
  Index col = 0;
  for (int n = 0; n < static_cast<int>(test_blocks.size()); ++n) {
    const PointSet &un = test_blocks[n];
    if (un.size() == 0)
      continue;
    if (std::abs(k - n) <= bandwidth)
      out.middleCols(col, un.size()) = gram(dk, un, h);
    else
      out.middleCols(col, un.size()) =
          wk.transpose() * proj.whiten(un) + rbar_ku.middleCols(col, un.size());
    col += un.size();
  }
  return out;
}

CrossCovariances compute_rbar_cross(const LmaContext &ctx) {
  std::vector<BlanketTerms> terms;
  for (int m = 0; m < ctx.blocks(); ++m) {
    try {
      terms.push_back(make_blanket_terms(ctx.projector(), ctx.train_block(m),
                                         ctx.blanket(m)));
    } catch (const NotPositiveDefinite &e) {
      throw BlockFactorizationError(m, e.what());
    }
  }
  return compute_rbar_cross(ctx, terms);
}

CrossCovariances compute_rbar_cross(const LmaContext &ctx,
                                    const std::vector<BlanketTerms> &terms) {
  const int count = ctx.blocks();
  const int b = ctx.bandwidth();
  if (b < 1)
    throw InvalidArgument("cross sweeps require a markov order of at least 1");
  const SupportProjector &proj = ctx.projector();
  const auto us = ctx.test_sizes();
  const auto uoff = offsets_of(us);

  // Predecessor conditioning R_{D_k P_k} R_{P_k P_k}^{-1} with
  // P_k = D_{k-B..k-1}, which is the blanket of block k-B-1.
  std::vector<Matrix> lower(count);
  for (int k = b + 1; k < count; ++k) {
    const BlanketTerms &t = terms[k - b - 1];
    const PointSet p = ctx.blanket(k - b - 1);
    lower[k] =
        t.blanket_factor.solve(proj.r(p, ctx.train_block(k))).transpose();
  }

  CrossCovariances out;
  out.rbar.resize(count);
  for (int k = 0; k < count; ++k)
    out.rbar[k] = Matrix::Zero(ctx.train_block(k).size(), uoff.back());

  for (int n = 0; n < count; ++n) {
    const PointSet &un = ctx.test_block(n);
    if (un.size() == 0)
      continue;
    std::vector<Matrix> col(count);
    for (int k = std::max(0, n - b); k <= std::min(count - 1, n + b); ++k)
      col[k] = proj.r(ctx.train_block(k), un);
    for (int k = n - b - 1; k >= 0; --k) {
      std::vector<const Matrix *> parts;
      for (int j = k + 1; j <= k + b; ++j)
        parts.push_back(&col[j]);
      col[k] = terms[k].rprime * vstack(parts, un.size());
    }
    for (int k = n + b + 1; k < count; ++k) {
      std::vector<const Matrix *> parts;
      for (int j = k - b; j <= k - 1; ++j)
        parts.push_back(&col[j]);
      col[k] = lower[k] * vstack(parts, un.size());
    }
    for (int k = 0; k < count; ++k)
      out.rbar[k].middleCols(uoff[n], us[n]) = col[k];
  }

  for (int k = 0; k < count; ++k)
    out.sigma_bar.push_back(sigma_bar_from_rbar(proj, ctx.train_block(k), k,
                                                ctx.data().test, out.rbar[k],
                                                ctx.hyper(), b));
  return out;
}

LocalSummary make_local_summary(const SupportProjector &proj,
                                const PointSet &block, const Vector &outputs,
                                const PointSet &blanket,
                                const Vector &blanket_outputs,
                                const Matrix &sigma_bar_block_u,
                                const Matrix &sigma_bar_blanket_u, double mu,
                                const BlanketTerms &terms, int block_index) {
  const Hyperparams &h = proj.hyper();
  const PointSet &s = proj.support();
  LocalSummary out;
  out.y_dot = outputs.array() - mu;
  out.sigma_dot_s = gram(block, s, h);
  out.sigma_dot_u = sigma_bar_block_u;
  Matrix schur = proj.r(block, block);
  if (blanket.size() > 0) {
    const Vector yb = blanket_outputs.array() - mu;
    out.y_dot -= terms.rprime * yb;
    out.sigma_dot_s -= terms.rprime * gram(blanket, s, h);
    out.sigma_dot_u -= terms.rprime * sigma_bar_blanket_u;
    schur -= terms.rprime * terms.r_blanket_block;
    schur = (0.5 * (schur + schur.transpose())).eval();
  }
  try {
    out.schur = cholesky_jittered(schur);
  } catch (const NotPositiveDefinite &e) {
    throw BlockFactorizationError(block_index, e.what());
  }
  return out;
}

LocalSummary local_summary(const LmaContext &ctx, int m,
                           const CrossCovariances &cross) {
  BlanketTerms terms;
  try {
    terms = make_blanket_terms(ctx.projector(), ctx.train_block(m),
                               ctx.blanket(m));
  } catch (const NotPositiveDefinite &e) {
    throw BlockFactorizationError(m, e.what());
  }
  return local_summary(ctx, m, cross, terms);
}

LocalSummary local_summary(const LmaContext &ctx, int m,
                           const CrossCovariances &cross,
                           const BlanketTerms &terms) {
  if (ctx.bandwidth() < 1)
    throw InvalidArgument("local summaries require a markov order >= 1");
  if (m < 0 || m >= ctx.blocks())
    throw InvalidArgument("block index out of range");
  const auto [first, last] = ctx.blanket_range(m);
  std::vector<const Matrix *> parts;
  for (int k = first; k <= last; ++k)
    parts.push_back(&cross.sigma_bar[k]);
  const Matrix blanket_u = vstack(parts, cross.sigma_bar[m].cols());
  return make_local_summary(ctx.projector(), ctx.train_block(m),
                            ctx.data().outputs[m], ctx.blanket(m),
                            ctx.blanket_outputs(m), cross.sigma_bar[m],
                            blanket_u, ctx.hyper().prior_mean, terms, m);
}

LocalContribution contribute(const LocalSummary &local,
                             const std::vector<Index> &test_sizes,
                             TestCovariance mode) {
  const Vector ay = local.schur.solve_lower(local.y_dot);
  const Matrix as = local.schur.solve_lower(local.sigma_dot_s);
  const Matrix au = local.schur.solve_lower(local.sigma_dot_u);
  LocalContribution c;
  c.y_s = as.transpose() * ay;
  c.y_u = au.transpose() * ay;
  c.ss = as.transpose() * as;
  c.us = au.transpose() * as;
  c.uu_diag = au.colwise().squaredNorm().transpose();
  if (mode == TestCovariance::block_diagonal) {
    Index at = 0;
    for (Index size : test_sizes) {
      const auto cols = au.middleCols(at, size);
      c.uu_blocks.push_back(cols.transpose() * cols);
      at += size;
    }
  } else if (mode == TestCovariance::full) {
    c.uu = au.transpose() * au;
  }
  return c;
}

GlobalSummary reduce_contributions(const Matrix &sigma_ss,
                                   const std::vector<LocalContribution> &parts,
                                   TestCovariance mode) {
  if (parts.empty())
    throw InvalidArgument("no local contributions to reduce");
  const Index s = sigma_ss.rows();
  const Index u = parts.front().y_u.size();
  GlobalSummary g;
  g.y_s = Vector::Zero(s);
  g.y_u = Vector::Zero(u);
  g.ss = sigma_ss;
  g.us = Matrix::Zero(u, s);
  g.uu_diag = Vector::Zero(u);
  if (mode == TestCovariance::block_diagonal)
    for (const auto &blk : parts.front().uu_blocks)
      g.uu_blocks.push_back(Matrix::Zero(blk.rows(), blk.cols()));
  if (mode == TestCovariance::full)
    g.uu = Matrix::Zero(u, u);
  for (const auto &c : parts) {
    if (c.y_s.size() != s || c.y_u.size() != u || c.ss.rows() != s ||
        c.us.rows() != u || c.us.cols() != s)
      throw InvalidArgument("local contribution has inconsistent shapes");
    g.y_s += c.y_s;
    g.y_u += c.y_u;
    g.ss += c.ss;
    g.us += c.us;
    g.uu_diag += c.uu_diag;
    if (mode == TestCovariance::block_diagonal) {
      if (c.uu_blocks.size() != g.uu_blocks.size())
        throw InvalidArgument("local contribution has inconsistent shapes");
      for (std::size_t i = 0; i < g.uu_blocks.size(); ++i)
        g.uu_blocks[i] += c.uu_blocks[i];
    }
    if (mode == TestCovariance::full)
      g.uu += c.uu;
  }
  return g;
}

GlobalSummary global_summary(const std::vector<LocalSummary> &locals,
                             const SupportProjector &proj,
                             const std::vector<Index> &test_sizes,
                             TestCovariance mode) {
  std::vector<LocalContribution> parts;
  parts.reserve(locals.size());
  for (const auto &l : locals) {
    if (l.sigma_dot_s.cols() != proj.support().size())
      throw InvalidArgument("local summary does not match the support set");
    parts.push_back(contribute(l, test_sizes, mode));
  }
  return reduce_contributions(proj.support_covariance(), parts, mode);
}

Prediction predict_from_summary(const Vector &y_s, const Matrix &ss,
                                const Vector &y_u, const Matrix &us,
                                const Vector &uu_diag, const Vector &prior_diag,
                                const Matrix *sigma_bar_uu, const Matrix *uu,
                                double mu, bool want_cov) {
  Cholesky f;
  try {
    f = cholesky_jittered(ss);
  } catch (const NotPositiveDefinite &e) {
    throw IllConditionedSupport(std::string("global support summary: ") +
                                e.what());
  }
  Prediction p;
  const Vector a = f.solve_lower(y_s);
  const Matrix w = f.solve_lower(Matrix(us.transpose()));
  p.mean = y_u - w.transpose() * a;
  p.mean.array() += mu;
  p.variance =
      prior_diag - uu_diag + w.colwise().squaredNorm().transpose();
  if (want_cov) {
    if (sigma_bar_uu == nullptr || uu == nullptr)
      throw InvalidArgument("full covariance needs the test-test terms");
    Matrix cov = *sigma_bar_uu - *uu + w.transpose() * w;
    p.covariance = 0.5 * (cov + cov.transpose());
  }
  return p;
}

Matrix assemble_sigma_bar_test(const LmaContext &ctx,
                               const CrossCovariances &cross) {
  const int count = ctx.blocks();
  const int b = ctx.bandwidth();
  const SupportProjector &proj = ctx.projector();
  const auto us = ctx.test_sizes();
  const auto uoff = offsets_of(us);
  Matrix out(uoff.back(), uoff.back());
  std::vector<Matrix> whitened;
  for (int m = 0; m < count; ++m)
    whitened.push_back(proj.whiten(ctx.test_block(m)));
  for (int m = 0; m < count; ++m) {
    const PointSet &um = ctx.test_block(m);
    if (um.size() == 0)
      continue;
    Matrix w_m;
    const auto [first, last] = ctx.blanket_range(m);
    if (first <= last && m + b + 1 < count) {
      const PointSet blanket = ctx.blanket(m);
      const Cholesky f = cholesky_jittered(proj.r(blanket, blanket));
      w_m = f.solve(proj.r(blanket, um)).transpose();
    }
    for (int n = m; n < count; ++n) {
      const PointSet &un = ctx.test_block(n);
      if (un.size() == 0)
        continue;
      Matrix value;
      if (n - m <= b) {
        value = gram(um, un, ctx.hyper());
      } else {
        std::vector<Matrix> rows;
        for (int j = first; j <= last; ++j)
          rows.push_back(cross.rbar[j].middleCols(uoff[n], us[n]));
        std::vector<const Matrix *> ptrs;
        for (const auto &r : rows)
          ptrs.push_back(&r);
        value = whitened[m].transpose() * whitened[n] +
                w_m * vstack(ptrs, us[n]);
      }
      out.block(uoff[m], uoff[n], us[m], us[n]) = value;
      if (n != m)
        out.block(uoff[n], uoff[m], us[n], us[m]) = value.transpose();
    }
  }
  return out;
}

Prediction lma_predict_summary(const LmaContext &ctx, bool want_cov) {
  if (ctx.bandwidth() < 1)
    throw InvalidArgument("the summary predictor requires markov order >= 1");
  const CrossCovariances cross = compute_rbar_cross(ctx);
  const auto sizes = ctx.test_sizes();
  const TestCovariance mode =
      want_cov ? TestCovariance::full : TestCovariance::diagonal;
  std::vector<LocalContribution> parts;
  for (int m = 0; m < ctx.blocks(); ++m)
    parts.push_back(contribute(local_summary(ctx, m, cross), sizes, mode));
  const GlobalSummary g =
      reduce_contributions(ctx.projector().support_covariance(), parts, mode);

  const PointSet u = ctx.all_test();
  const Vector prior_diag = gram_diagonal(u, ctx.hyper());
  Matrix sigma_bar_uu;
  if (want_cov)
    sigma_bar_uu = assemble_sigma_bar_test(ctx, cross);
  const Prediction blocked = predict_from_summary(
      g.y_s, g.ss, g.y_u, g.us, g.uu_diag, prior_diag,
      want_cov ? &sigma_bar_uu : nullptr, want_cov ? &g.uu : nullptr,
      ctx.hyper().prior_mean, want_cov);
  return unpermute(blocked, ctx.data().test_order);
}

Prediction lma_predict_summary(const Dataset &train, const Matrix &test,
                               const Hyperparams &h, const LmaConfig &config,
                               bool want_cov) {
  h.validate(train.dimension());
  if (config.markov_order < 1)
    throw InvalidArgument("the summary predictor requires markov order >= 1");
  LmaProblem problem = prepare_problem(train, test, config);
  const LmaContext ctx(std::move(problem.data), h, config.markov_order);
  return lma_predict_summary(ctx, want_cov);
}

Prediction lma_predict(const Dataset &train, const Matrix &test,
                       const Hyperparams &h, const LmaConfig &config,
                       bool want_cov) {
  if (config.markov_order == 0) {
    h.validate(train.dimension());
    const LmaProblem problem = prepare_problem(train, test, config);
    return pic_predict_direct(train, test, h, problem.support,
                              problem.partition, want_cov,
                              config.shared_support_identity);
  }
  return lma_predict_summary(train, test, h, config, want_cov);
}

} // namespace lmagp
