// Copyright 2026 The LCB Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LCB_NIG_HPP_
#define LCB_NIG_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace lcb {

// Normal-inverse-Gamma distribution over (beta, sigma2):
//   sigma2 ~ InvGamma(shape, rate),  beta | sigma2 ~ N(mean, sigma2 * scale).
template <typename Scalar>
struct NigPrior {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  VectorType mean;
  MatrixType scale;
  Scalar shape = 1;
  Scalar rate = 1;

  // mean 0, scale I, shape = rate = 1.
  static NigPrior standard(Eigen::Index dim) {
    return NigPrior{VectorType::Zero(dim), MatrixType::Identity(dim, dim), Scalar(1), Scalar(1)};
  }

  Eigen::Index dim() const { return mean.size(); }

  void validate() const {
    if (mean.size() < 1 || scale.rows() != mean.size() || scale.cols() != mean.size()) {
      throw std::invalid_argument("NigPrior: inconsistent dimensions");
    }
    if (!(shape > 0) || !(rate > 0)) throw std::invalid_argument("NigPrior: shape and rate must be positive");
    if (!scale.isApprox(scale.transpose())) throw std::invalid_argument("NigPrior: scale must be symmetric");
    Eigen::LLT<MatrixType> llt(scale);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("NigPrior: scale must be positive definite");
  }
};

// Sufficient statistics of a linear-Gaussian regression data set.
template <typename Scalar>
struct RegressionStats {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MatrixType xtx;
  VectorType xtr;
  Scalar rtr = 0;
  Scalar count = 0;

  static RegressionStats zero(Eigen::Index dim) {
    return RegressionStats{MatrixType::Zero(dim, dim), VectorType::Zero(dim), Scalar(0), Scalar(0)};
  }

  template <typename DerivedX, typename DerivedR>
  static RegressionStats from(const Eigen::MatrixBase<DerivedX>& features,
                              const Eigen::MatrixBase<DerivedR>& rewards) {
    if (features.rows() != rewards.size()) throw std::invalid_argument("RegressionStats: row mismatch");
    RegressionStats s;
    s.xtx = features.transpose() * features;
    s.xtr = features.transpose() * rewards;
    s.rtr = rewards.squaredNorm();
    s.count = static_cast<Scalar>(rewards.size());
    return s;
  }

  Eigen::Index dim() const { return xtr.size(); }

  RegressionStats& operator+=(const RegressionStats& o) {
    xtx += o.xtx;
    xtr += o.xtr;
    rtr += o.rtr;
    count += o.count;
    return *this;
  }
  RegressionStats& operator-=(const RegressionStats& o) {
    xtx -= o.xtx;
    xtr -= o.xtr;
    rtr -= o.rtr;
    count -= o.count;
    return *this;
  }
  friend RegressionStats operator+(RegressionStats a, const RegressionStats& b) { return a += b; }
  friend RegressionStats operator-(RegressionStats a, const RegressionStats& b) { return a -= b; }
};

// Conjugate update:
//   Vn = (V0^-1 + X^T X)^-1,  wn = Vn (V0^-1 w0 + X^T r),
//   an = a0 + n/2,            bn = b0 + (w0^T V0^-1 w0 + r^T r - wn^T Vn^-1 wn) / 2.
template <typename Scalar>
NigPrior<Scalar> nig_posterior(const NigPrior<Scalar>& prior, const RegressionStats<Scalar>& stats) {
  using MatrixType = typename NigPrior<Scalar>::MatrixType;
  using VectorType = typename NigPrior<Scalar>::VectorType;
  if (stats.dim() != prior.dim()) throw std::invalid_argument("nig_posterior: dimension mismatch");
  const Eigen::Index d = prior.dim();
  Eigen::LLT<MatrixType> prior_llt(prior.scale);
  if (prior_llt.info() != Eigen::Success) throw std::invalid_argument("nig_posterior: singular prior scale");
  const MatrixType prior_precision = prior_llt.solve(MatrixType::Identity(d, d));
  const VectorType prior_eta = prior_precision * prior.mean;
  const MatrixType precision = prior_precision + stats.xtx;
  const VectorType eta = prior_eta + stats.xtr;
  Eigen::LLT<MatrixType> llt(precision);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("nig_posterior: posterior precision not positive definite");
  NigPrior<Scalar> post;
  post.scale = llt.solve(MatrixType::Identity(d, d));
  post.scale = (post.scale + post.scale.transpose()) / Scalar(2);
  post.mean = llt.solve(eta);
  post.shape = prior.shape + stats.count / Scalar(2);
  const Scalar quad = prior.mean.dot(prior_eta) + stats.rtr - post.mean.dot(eta);
  post.rate = prior.rate + std::max(quad, Scalar(0)) / Scalar(2);
  return post;
}

template <typename Scalar, typename DerivedX, typename DerivedR>
NigPrior<Scalar> nig_posterior(const NigPrior<Scalar>& prior, const Eigen::MatrixBase<DerivedX>& features,
                               const Eigen::MatrixBase<DerivedR>& rewards) {
  if (features.cols() != prior.dim()) throw std::invalid_argument("nig_posterior: dimension mismatch");
  return nig_posterior(prior, RegressionStats<Scalar>::from(features, rewards));
}

// Log density of `rewards` under the posterior predictive of `nig`: a
// multivariate Student-t with 2*shape degrees of freedom, location X*mean
// and scale matrix (rate/shape) (I + X scale X^T).  Zero for no rows.
template <typename Scalar, typename DerivedX, typename DerivedR>
Scalar user_predictive_loglik(const NigPrior<Scalar>& nig, const Eigen::MatrixBase<DerivedX>& features,
                              const Eigen::MatrixBase<DerivedR>& rewards) {
  using MatrixType = typename NigPrior<Scalar>::MatrixType;
  using VectorType = typename NigPrior<Scalar>::VectorType;
  const Eigen::Index n = rewards.size();
  if (features.rows() != n || (n > 0 && features.cols() != nig.dim())) {
    throw std::invalid_argument("user_predictive_loglik: dimension mismatch");
  }
  if (n == 0) return Scalar(0);
  const MatrixType x = features;
  MatrixType cov = MatrixType::Identity(n, n) + x * nig.scale * x.transpose();
  cov *= nig.rate / nig.shape;
  Eigen::LLT<MatrixType> llt(cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("user_predictive_loglik: scale not positive definite");
  const VectorType resid = rewards - x * nig.mean;
  const Scalar maha = resid.dot(llt.solve(resid));
  const Scalar nu = Scalar(2) * nig.shape;
  const Scalar half_log_det = llt.matrixLLT().diagonal().array().log().sum();
  const Scalar dim = static_cast<Scalar>(n);
  return std::lgamma((nu + dim) / 2) - std::lgamma(nu / 2) -
         dim / 2 * std::log(nu * std::numbers::pi_v<Scalar>) - half_log_det -
         (nu + dim) / 2 * std::log1p(maha / nu);
}

// Marginal likelihood p(r | X) of a data set under a NIG prior, evaluated
// from sufficient statistics.  The prior-dependent terms are computed once.
// log p(r_u | data_h) = log_marginal(S_h + S_u) - log_marginal(S_h) is the
// predictive term used for per-user cluster assignment.
template <typename Scalar>
class NigEvidence {
 public:
  using VectorType = typename NigPrior<Scalar>::VectorType;
  using MatrixType = typename NigPrior<Scalar>::MatrixType;

  explicit NigEvidence(const NigPrior<Scalar>& prior) : prior_(prior) {
    prior_.validate();
    const Eigen::Index d = prior_.dim();
    Eigen::LLT<MatrixType> llt(prior_.scale);
    precision_ = llt.solve(MatrixType::Identity(d, d));
    eta_ = precision_ * prior_.mean;
    mean_quad_ = prior_.mean.dot(eta_);
    log_det_scale_ = Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
    constant_ = -Scalar(0.5) * log_det_scale_ + prior_.shape * std::log(prior_.rate) - std::lgamma(prior_.shape);
    work_.resize(d, d);
  }

  const NigPrior<Scalar>& prior() const { return prior_; }

  Scalar log_marginal(const RegressionStats<Scalar>& stats) const {
    if (stats.count == 0) return Scalar(0);
    work_ = precision_ + stats.xtx;
    Eigen::LLT<Eigen::Ref<MatrixType>> llt(work_);
    if (llt.info() != Eigen::Success) throw std::runtime_error("NigEvidence: posterior precision not positive definite");
    const VectorType eta = eta_ + stats.xtr;
    const VectorType mean = llt.solve(eta);
    const Scalar log_det_precision = Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
    const Scalar shape = prior_.shape + stats.count / Scalar(2);
    const Scalar rate = prior_.rate + std::max(mean_quad_ + stats.rtr - mean.dot(eta), Scalar(0)) / Scalar(2);
    return -stats.count / Scalar(2) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) -
           Scalar(0.5) * log_det_precision + constant_ - shape * std::log(rate) + std::lgamma(shape);
  }

 private:
  NigPrior<Scalar> prior_;
  MatrixType precision_;
  VectorType eta_;
  Scalar mean_quad_ = 0;
  Scalar log_det_scale_ = 0;
  Scalar constant_ = 0;
  mutable MatrixType work_;
};

using NigPriord = NigPrior<double>;
using RegressionStatsd = RegressionStats<double>;

}  // namespace lcb

#endif  // LCB_NIG_HPP_
