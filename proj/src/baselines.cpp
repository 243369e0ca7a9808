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

#include "lmagp/baselines.hpp"

#include <string>

#include "lmagp/blockmat.hpp"
#include "lmagp/errors.hpp"

namespace lmagp {

Prediction gaussian_condition(const Matrix &sigma_dd, const Matrix &sigma_ud,
                              const Vector &prior_uu_diag,
                              const Matrix *prior_uu, const Vector &resid,
                              double mu, bool want_cov) {
  if (sigma_ud.cols() != sigma_dd.rows() || resid.size() != sigma_dd.rows() ||
      prior_uu_diag.size() != sigma_ud.rows())
    throw InvalidArgument("gaussian_condition: shape mismatch");
  Cholesky f;
  try {
    f = cholesky_jittered(sigma_dd);
  } catch (const NotPositiveDefinite &e) {
    throw IllConditionedData(std::string("training covariance: ") + e.what());
  }
  Prediction p;
  const Index u = sigma_ud.rows();
  if (u == 0) {
    p.mean.resize(0);
    p.variance.resize(0);
    if (want_cov)
      p.covariance = Matrix(0, 0);
    return p;
  }
  const Vector alpha = f.solve(resid);
  p.mean = sigma_ud * alpha;
  p.mean.array() += mu;
  const Matrix w = f.solve_lower(Matrix(sigma_ud.transpose()));
  p.variance = prior_uu_diag - w.colwise().squaredNorm().transpose();
  if (want_cov) {
    if (prior_uu == nullptr)
      throw InvalidArgument("gaussian_condition: full prior required");
    Matrix cov = *prior_uu - w.transpose() * w;
    p.covariance = 0.5 * (cov + cov.transpose());
  }
  return p;
}

Prediction unpermute(const Prediction &blocked,
                     const std::vector<Index> &order) {
  const Index n = blocked.mean.size();
  if (static_cast<Index>(order.size()) != n)
    throw InvalidArgument("unpermute: order has the wrong length");
  Prediction p;
  p.mean.resize(n);
  p.variance.resize(n);
  for (Index i = 0; i < n; ++i) {
    p.mean(order[i]) = blocked.mean(i);
    p.variance(order[i]) = blocked.variance(i);
  }
  if (blocked.covariance) {
    Matrix c(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        c(order[i], order[j]) = (*blocked.covariance)(i, j);
    p.covariance = std::move(c);
  }
  return p;
}

Prediction fgp_predict(const Dataset &train, const Matrix &test,
                       const Hyperparams &h, bool want_cov) {
  if (train.size() < 1)
    throw InvalidArgument("fgp_predict: empty training set");
  if (!train.has_outputs())
    throw InvalidArgument("fgp_predict: training data has no outputs");
  h.validate(train.dimension());
  const PointSet d = PointSet::all(train.inputs, PointDomain::train);
  const PointSet u = PointSet::all(test, PointDomain::test);
  const Matrix sigma_dd = gram(d, d, h);
  const Matrix sigma_ud = gram(u, d, h);
  const Vector resid = train.outputs.array() - h.prior_mean;
  Matrix prior_uu;
  if (want_cov)
    prior_uu = gram(u, u, h);
  return gaussian_condition(sigma_dd, sigma_ud, gram_diagonal(u, h),
                            want_cov ? &prior_uu : nullptr, resid,
                            h.prior_mean, want_cov);
}

Matrix pic_prior(const BlockedData &data, const Hyperparams &h) {
  const SupportProjector proj(data.support, h);
  const PointSet d = PointSet::concat(data.train);
  Matrix out = proj.q(d, d);
  Index off = 0;
  for (const auto &blk : data.train) {
    out.block(off, off, blk.size(), blk.size()) = gram(blk, blk, h);
    off += blk.size();
  }
  return out;
}

Prediction pic_predict_direct(const Dataset &train, const Matrix &test,
                              const Hyperparams &h, const SupportSet &support,
                              const BlockPartition &partition, bool want_cov,
                              bool shared_support_identity) {
  h.validate(train.dimension());
  const BlockedData data = make_blocked(train, test, partition, support,
                                        shared_support_identity);
  const SupportProjector proj(data.support, h);
  const PointSet d = PointSet::concat(data.train);
  const PointSet u = PointSet::concat(data.test);

  const Matrix sigma_dd = pic_prior(data, h);
  Matrix sigma_ud = proj.q(u, d);
  Matrix prior_uu;
  if (want_cov)
    prior_uu = proj.q(u, u);
  Index du = 0, uu = 0;
  for (int m = 0; m < data.blocks(); ++m) {
    const PointSet &dm = data.train[m];
    const PointSet &um = data.test[m];
    if (um.size() > 0) {
      sigma_ud.block(uu, du, um.size(), dm.size()) = gram(um, dm, h);
      if (want_cov)
        prior_uu.block(uu, uu, um.size(), um.size()) = gram(um, um, h);
    }
    du += dm.size();
    uu += um.size();
  }

  Vector y(d.size());
  Index off = 0;
  for (const auto &ym : data.outputs) {
    y.segment(off, ym.size()) = ym;
    off += ym.size();
  }
  const Vector resid = y.array() - h.prior_mean;
  const Prediction blocked =
      gaussian_condition(sigma_dd, sigma_ud, gram_diagonal(u, h),
                         want_cov ? &prior_uu : nullptr, resid, h.prior_mean,
                         want_cov);
  return unpermute(blocked, data.test_order);
}

} // namespace lmagp
