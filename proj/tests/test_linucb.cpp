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

#include "doctest.h"
#include "lcb/linucb.hpp"
#include "test_util.hpp"

using namespace lcb;

namespace {

Matrix arms2() {
  Matrix m(2, 2);
  m << 1, 0, 0, 1;
  return m;
}

}  // namespace

TEST_CASE("fresh state picks the longest arm") {
  LinUcbd s(3, LinUcbOptions{2.0, 4.0});
  CHECK(s.gram().isApprox(4.0 * Matrix::Identity(3, 3)));
  CHECK(s.response().isZero());
  Matrix arms(3, 3);
  arms << 0.3, 0, 0, 0, 0.9, 0, 0.5, 0.5, 0;
  const auto sel = s.select(arms);
  CHECK(sel.arm == 1);
  for (Eigen::Index a = 0; a < 3; ++a) {
    CHECK(sel.scores(a) == doctest::Approx(2.0 * arms.row(a).norm() / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("identical arms tie to index 0") {
  LinUcbd s(2);
  Matrix arms(2, 2);
  arms << 0.6, 0.8, 0.6, 0.8;
  CHECK(s.select(arms).arm == 0);
  CHECK(linucb_select(s, Context(arms)).arm == 0);
}

TEST_CASE("hand-solved 2x2 after one update") {
  for (double alpha : {0.0, 0.5, 1.0, 3.0}) {
    LinUcbd s(2, LinUcbOptions{alpha, 1.0});
    Vector x(2);
    x << 1, 0;
    linucb_update(s, x, 1.0);
    // A = diag(2, 1): theta = (1/2, 0); widths sqrt(1/2) and 1.
    const auto sel = s.select(arms2());
    CHECK(sel.scores(0) == doctest::Approx(0.5 + alpha * std::sqrt(0.5)).epsilon(1e-14));
    CHECK(sel.scores(1) == doctest::Approx(alpha).epsilon(1e-14));
    CHECK(s.gram_inverse()(0, 0) == doctest::Approx(0.5));
    CHECK(s.gram_inverse()(1, 1) == doctest::Approx(1.0));
  }
}

TEST_CASE("zero update leaves the state unchanged") {
  LinUcbd s(3);
  s.update(Vector::Zero(3), 0.7);
  CHECK(s.gram().isApprox(Matrix::Identity(3, 3)));
  CHECK(s.response().isZero());
  CHECK(s.theta().isZero());
}

TEST_CASE("repeated updates accumulate n x x^T") {
  LinUcbd s(3, LinUcbOptions{1.0, 0.5});
  Vector x(3);
  x << 0.2, -0.4, 0.5;
  for (int i = 0; i < 17; ++i) s.update(x, 0.3);
  const Matrix expected = 0.5 * Matrix::Identity(3, 3) + 17.0 * x * x.transpose();
  CHECK((s.gram() - expected).norm() < 1e-12);
  CHECK((s.response() - 17.0 * 0.3 * x).norm() < 1e-12);
}

TEST_CASE("theta equals batch ridge regression") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index d = 4 + trial;
    const double ridge = 0.5 + trial;
    LinUcbd s(d, LinUcbOptions{1.0, ridge, 97});
    const int n = 2500;
    Matrix X(n, d);
    Vector r(n);
    for (int i = 0; i < n; ++i) {
      Vector x = testing::random_vector(rng, d);
      x /= x.norm();
      X.row(i) = x.transpose();
      r(i) = sample_uniform(rng);
      s.update(x, r(i));
    }
    // Independent oracle: normal equations solved through a QR of the
    // augmented design [X; sqrt(ridge) I].
    Matrix aug(n + d, d);
    aug << X, std::sqrt(ridge) * Matrix::Identity(d, d);
    Vector rhs = Vector::Zero(n + d);
    rhs.head(n) = r;
    const Vector batch = aug.colPivHouseholderQr().solve(rhs);
    CHECK((s.theta() - batch).norm() < 1e-8);
    const Matrix inv = (X.transpose() * X + ridge * Matrix::Identity(d, d)).inverse();
    CHECK((s.gram_inverse() - inv).norm() < 1e-8);
  }
}

TEST_CASE("scores do not depend on update order") {
  Rng rng(9);
  std::vector<std::pair<Vector, double>> pairs;
  for (int i = 0; i < 50; ++i) {
    Vector x = testing::random_vector(rng, 3);
    pairs.emplace_back(x / x.norm(), sample_uniform(rng));
  }
  LinUcbd fwd(3), rev(3);
  for (const auto& [x, r] : pairs) fwd.update(x, r);
  for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) rev.update(it->first, it->second);
  const Context ctx = testing::random_context(rng, 10, 3);
  CHECK((fwd.select(ctx.arms()).scores - rev.select(ctx.arms()).scores).norm() < 1e-10);
}

TEST_CASE("float instantiation tracks the double one") {
  Rng rng(1);
  LinUcb<float> f(3);
  LinUcbd d(3);
  for (int i = 0; i < 30; ++i) {
    Vector x = testing::random_vector(rng, 3);
    x /= x.norm();
    const double r = sample_uniform(rng);
    f.update(x.cast<float>(), static_cast<float>(r));
    d.update(x, r);
  }
  CHECK((f.theta().cast<double>() - d.theta()).norm() < 1e-4);
}

TEST_CASE("linucb errors") {
  LinUcbd s(2);
  const Matrix wide = Matrix::Constant(2, 3, 0.1);
  CHECK_THROWS_AS(s.select(wide), std::invalid_argument);
  CHECK_THROWS_AS(s.update(Vector::Ones(3), 0.0), std::invalid_argument);
  Vector bad(2);
  bad << std::nan(""), 0;
  CHECK_THROWS_AS(s.update(bad, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(LinUcbd(2, LinUcbOptions{1.0, 0.0}), std::invalid_argument);
}
