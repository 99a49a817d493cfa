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

#ifndef LCB_LINUCB_HPP_
#define LCB_LINUCB_HPP_

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "lcb/core.hpp"

namespace lcb {

struct LinUcbOptions {
  double alpha = 1.0;  // exploration coefficient
  double ridge = 1.0;  // initial Gram matrix is ridge * I
  // Rebuild the inverse from a fresh Cholesky factorization after this many
  // rank-one updates.
  int refactor_every = 1000;
};

// Ridge-regression upper-confidence-bound bandit over linear arm features.
// The inverse Gram matrix is kept current with Sherman-Morrison updates.
template <typename Scalar>
class LinUcb {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  struct Selection {
    Eigen::Index arm = 0;
    VectorType scores;
  };

  explicit LinUcb(Eigen::Index dim, const LinUcbOptions& options = {})
      : alpha_(static_cast<Scalar>(options.alpha)),
        ridge_(static_cast<Scalar>(options.ridge)),
        refactor_every_(options.refactor_every),
        gram_(MatrixType::Identity(dim, dim) * ridge_),
        gram_inverse_(MatrixType::Identity(dim, dim) / ridge_),
        response_(VectorType::Zero(dim)),
        theta_(VectorType::Zero(dim)) {
    if (dim < 1) throw std::invalid_argument("LinUcb: dimension must be positive");
    if (!(options.alpha >= 0.0) || !(options.ridge > 0.0)) {
      throw std::invalid_argument("LinUcb: alpha must be non-negative and ridge positive");
    }
    if (refactor_every_ < 1) refactor_every_ = 1;
  }

  Eigen::Index dim() const { return response_.size(); }
  Scalar alpha() const { return alpha_; }
  Scalar ridge() const { return ridge_; }
  long updates() const { return updates_; }

  const MatrixType& gram() const { return gram_; }
  const MatrixType& gram_inverse() const { return gram_inverse_; }
  const VectorType& response() const { return response_; }
  const VectorType& theta() const { return theta_; }

  // Upper confidence scores for every row of `arms`; argmax with ties going
  // to the lowest index.
  template <typename Derived>
  Selection select(const Eigen::MatrixBase<Derived>& arms) const {
    if (arms.cols() != dim()) throw std::invalid_argument("LinUcb: context dimension mismatch");
    Selection out;
    const MatrixType projected = arms * gram_inverse_;
    const VectorType width =
        (projected.cwiseProduct(arms).rowwise().sum()).cwiseMax(Scalar(0)).cwiseSqrt();
    out.scores = arms * theta_ + alpha_ * width;
    out.arm = 0;
    for (Eigen::Index a = 1; a < out.scores.size(); ++a) {
      if (out.scores(a) > out.scores(out.arm)) out.arm = a;
    }
    return out;
  }

  template <typename Derived>
  void update(const Eigen::MatrixBase<Derived>& x, Scalar reward) {
    if (x.size() != dim()) throw std::invalid_argument("LinUcb: feature dimension mismatch");
    if (!x.allFinite() || !std::isfinite(static_cast<double>(reward))) {
      throw std::invalid_argument("LinUcb: non-finite update");
    }
    const VectorType v = x;
    gram_.noalias() += v * v.transpose();
    response_ += reward * v;
    ++updates_;
    if (updates_ % refactor_every_ == 0) {
      refactor();
    } else {
      const VectorType av = gram_inverse_ * v;
      const Scalar denom = Scalar(1) + v.dot(av);
      gram_inverse_.noalias() -= (av * av.transpose()) / denom;
      gram_inverse_ = (gram_inverse_ + gram_inverse_.transpose()).eval() / Scalar(2);
    }
    theta_.noalias() = gram_inverse_ * response_;
  }

  // Recomputes the inverse and coefficients from the Gram matrix directly.
  void refactor() {
    Eigen::LLT<MatrixType> llt(gram_);
    if (llt.info() != Eigen::Success) throw std::runtime_error("LinUcb: Gram matrix lost definiteness");
    gram_inverse_ = llt.solve(MatrixType::Identity(dim(), dim()));
    theta_ = llt.solve(response_);
  }

 private:
  Scalar alpha_;
  Scalar ridge_;
  int refactor_every_;
  long updates_ = 0;
  MatrixType gram_;
  MatrixType gram_inverse_;
  VectorType response_;
  VectorType theta_;
};

using LinUcbd = LinUcb<double>;

inline LinUcbd::Selection linucb_select(const LinUcbd& state, const Context& ctx) {
  return state.select(ctx.arms());
}

inline void linucb_update(LinUcbd& state, const Vector& x, double reward) { state.update(x, reward); }

}  // namespace lcb

#endif  // LCB_LINUCB_HPP_
