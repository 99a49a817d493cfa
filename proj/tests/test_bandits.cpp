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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lcb/bandits.hpp"
#include "test_util.hpp"

using namespace lcb;

namespace {

Context unit_arms() {
  Matrix m(2, 2);
  m << 1, 0, 0, 1;
  return Context(m);
}

// Policy h always plays arm h on unit_arms().
PolicySet two_policies() {
  Vector e0 = Vector::Unit(2, 0);
  Vector e1 = Vector::Unit(2, 1);
  return {Policy{PolicyKind::deterministic, e0, 1.0}, Policy{PolicyKind::deterministic, e1, 1.0}};
}

Vector normalize_log(const Vector& lw) {
  Vector w = (lw.array() - lw.maxCoeff()).exp().matrix();
  return w / w.sum();
}

}  // namespace

TEST_CASE("algorithm names round-trip") {
  for (auto a : {BanditAlgorithm::exp3, BanditAlgorithm::exp4p, BanditAlgorithm::epoch_greedy, BanditAlgorithm::gts}) {
    CHECK(parse_bandit_algorithm(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_bandit_algorithm("ucb"), std::invalid_argument);
}

TEST_CASE("exp3 starts uniform and follows the hand-evaluated update") {
  Exp3 b(2, 0.1);
  CHECK(b.distribution()(0) == doctest::Approx(0.5));
  b.update(0, 1.0);
  // w = (exp(0.1 * (1 / 0.5) / 2), 1) = (exp(0.1), 1).
  const double w0 = std::exp(0.1);
  const double q0 = 0.9 * w0 / (w0 + 1.0) + 0.05;
  CHECK(b.distribution()(0) == doctest::Approx(q0).epsilon(1e-14));
  CHECK(b.distribution()(1) == doctest::Approx(1.0 - q0).epsilon(1e-14));
  CHECK(b.log_weights()(0) - b.log_weights()(1) == doctest::Approx(0.1).epsilon(1e-14));

  Exp3 z(3, 0.2);
  z.update(1, 0.0);
  CHECK(z.log_weights().isZero());
  CHECK_THROWS_AS(z.update(0, 1.5), std::invalid_argument);
}

TEST_CASE("exp3 default gamma") {
  CHECK(Exp3::default_gamma(4, 0) == 0.1);
  CHECK(Exp3::default_gamma(4, 100) ==
        doctest::Approx(std::sqrt(4 * std::log(4.0) / ((std::numbers::e - 1) * 100))));
  CHECK(Exp3::default_gamma(50, 1) == 1.0);
}

TEST_CASE("exp3 regret on a two-policy stochastic problem") {
  const int horizon = 2000;
  const PolicySet ps = two_policies();
  const Context ctx = unit_arms();
  double total_regret = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    Exp3 b(2, Exp3::default_gamma(2, horizon));
    double regret = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const BanditChoice c = b.select(ctx, ps, rng);
      const double mean = c.arm == 0 ? 0.65 : 0.35;
      const double r = sample_uniform(rng) < mean ? 1.0 : 0.0;
      regret += 0.65 - mean;
      b.update(*c.policy, r);
    }
    total_regret += regret;
  }
  CHECK(total_regret / 100.0 <= 2.5 * std::sqrt(horizon * 2 * std::log(2.0)));
}

TEST_CASE("exp4p mixes advice with the floor") {
  SUBCASE("identical advice ignores weights") {
    Exp4P b(3, 4, 0.05, 0.05, 10);
    Matrix advice(3, 4);
    for (int h = 0; h < 3; ++h) advice.row(h) << 0.1, 0.2, 0.3, 0.4;
    b.update(advice, 2, 1.0);
    Matrix skewed = advice;
    skewed.row(0) << 0.7, 0.1, 0.1, 0.1;
    b.update(skewed, 0, 1.0);
    const Vector p = b.arm_distribution(advice);
    for (int a = 0; a < 4; ++a) CHECK(p(a) == doctest::Approx(0.8 * advice(0, a) + 0.05).epsilon(1e-12));
  }
  SUBCASE("single uniform expert") {
    Exp4P b(1, 2, 0.0, 0.05, 10);
    Matrix advice(1, 2);
    advice << 0.5, 0.5;
    const Vector p = b.arm_distribution(advice);
    CHECK(p(0) == doctest::Approx(0.5));
    CHECK(p(1) == doctest::Approx(0.5));
  }
  SUBCASE("invalid floor") {
    CHECK_THROWS_AS(Exp4P(2, 4, 0.3, 0.05, 10), std::invalid_argument);
    CHECK_THROWS_AS(Exp4P(2, 4, 0.0, 0.05, 10), std::invalid_argument);
  }
  SUBCASE("a single expert with one-hot advice and no floor stays finite") {
    CHECK(Exp4P::default_p_min(1, 4, 10) == 0.0);
    Exp4P one(1, 4, 0.0, 0.05, 10);
    Matrix onehot = Matrix::Zero(1, 4);
    onehot(0, 2) = 1.0;
    for (int t = 0; t < 5; ++t) one.update(onehot, 2, 1.0);
    CHECK(one.log_weights().allFinite());
    CHECK(one.arm_distribution(onehot)(2) == 1.0);
  }
}

TEST_CASE("exp4p three-round hand trace") {
  const double p_min = 0.1;
  const double delta = 0.05;
  const int horizon = 3;
  Matrix advice(2, 2);
  advice << 0.8, 0.2, 0.3, 0.7;
  const std::size_t arms[3] = {0, 1, 1};
  const double rewards[3] = {1.0, 0.0, 1.0};

  Exp4P b(2, 2, p_min, delta, horizon);
  double w[2] = {1.0, 1.0};
  const double conf = std::sqrt(std::log(2.0 / delta) / (2.0 * horizon));
  for (int t = 0; t < 3; ++t) {
    const double total = w[0] + w[1];
    double p[2];
    for (int a = 0; a < 2; ++a) {
      p[a] = (1 - 2 * p_min) * (w[0] / total * advice(0, a) + w[1] / total * advice(1, a)) + p_min;
    }
    const Vector got_p = b.arm_distribution(advice);
    CHECK(got_p(0) == doctest::Approx(p[0]).epsilon(1e-14));
    const std::size_t a = arms[t];
    const double rhat = rewards[t] / p[a];
    for (int h = 0; h < 2; ++h) {
      const double yhat = advice(h, static_cast<Eigen::Index>(a)) * rhat;
      const double vhat = advice(h, 0) / p[0] + advice(h, 1) / p[1];
      w[h] *= std::exp(p_min / 2 * (yhat + vhat * conf));
    }
    b.update(advice, a, rewards[t]);
    const Vector got = b.expert_weights();
    CHECK(got(0) == doctest::Approx(w[0] / (w[0] + w[1])).epsilon(1e-13));
  }
}

TEST_CASE("epoch-greedy schedule and exploitation") {
  const PolicySet ps = two_policies();
  const Context ctx = unit_arms();
  Rng rng(1);

  SUBCASE("first step explores") {
    EpochGreedy b(2, 2);
    CHECK(b.exploring());
    CHECK(b.select(ctx, ps, rng).exploration);
  }
  SUBCASE("importance-weighted estimate picks the rewarded policy") {
    EpochGreedy b(2, 2);
    b.update(ExplorationRecord{ctx, 0, 1.0});
    const Vector est = b.policy_estimates(ps);
    CHECK(est(0) == 2.0);
    CHECK(est(1) == 0.0);
    const BanditChoice c = b.select(ctx, ps, rng);
    CHECK_FALSE(c.exploration);
    CHECK(*c.policy == 0);
    CHECK(c.arm == 0);
  }
  SUBCASE("ties go to policy 0") {
    EpochGreedy b(2, 2);
    b.update(ExplorationRecord{ctx, 0, 0.5});
    b.update(std::nullopt);  // exploit step of epoch 1
    b.update(ExplorationRecord{ctx, 1, 0.5});
    CHECK(*b.select(ctx, ps, rng).policy == 0);
  }
  SUBCASE("epoch l has one exploration and l exploitation steps") {
    EpochGreedy b(2, 2);
    std::vector<int> explore_steps;
    for (int t = 1; t <= 15; ++t) {
      if (b.exploring()) {
        explore_steps.push_back(t);
        b.update(ExplorationRecord{ctx, 0, 0.0});
      } else {
        b.update(std::nullopt);
      }
    }
    // Epoch starts at 1, 3, 6, 10, 15.
    CHECK(explore_steps == std::vector<int>{1, 3, 6, 10, 15});
  }
}

TEST_CASE("generalized thompson weights") {
  SUBCASE("fresh state is uniform") {
    GeneralizedThompson b(4, 1.0);
    for (int h = 0; h < 4; ++h) CHECK(b.distribution()(h) == doctest::Approx(0.25));
  }
  SUBCASE("three exact-versus-off-by-one rounds give exp(3)") {
    GeneralizedThompson b(2, 1.0);
    const double rewards[3] = {0.2, 0.9, 0.5};
    for (double r : rewards) {
      Vector pred(2);
      pred << r, r - 1.0;
      b.update(pred, r);
    }
    const Vector q = b.distribution();
    CHECK(q(0) / q(1) == doctest::Approx(std::exp(3.0)).epsilon(1e-12));
  }
  SUBCASE("zero rate never moves") {
    GeneralizedThompson b(3, 0.0);
    Vector pred(3);
    pred << 0.1, 0.5, 0.9;
    for (int i = 0; i < 10; ++i) b.update(pred, 0.3);
    CHECK(b.log_weights().isZero());
  }
  SUBCASE("weight order follows cumulative squared loss") {
    Rng rng(3);
    GeneralizedThompson b(5, 2.5);
    Vector loss = Vector::Zero(5);
    for (int t = 0; t < 200; ++t) {
      const Vector pred = testing::random_vector(rng, 5, 0.5);
      const double r = sample_uniform(rng);
      b.update(pred, r);
      loss.array() += (r - pred.array()).square();
    }
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        if (loss(i) < loss(j)) CHECK(b.log_weights()(i) > b.log_weights()(j));
      }
    }
  }
}

TEST_CASE("policy bandit wrapper keeps distributions valid") {
  Rng rng(7);
  PolicySet det;
  PolicySet prob;
  for (int h = 0; h < 4; ++h) {
    const Vector beta = testing::random_vector(rng, 3);
    det.push_back(Policy{PolicyKind::deterministic, beta, 1.0});
    prob.push_back(Policy{PolicyKind::probabilistic, beta, 0.5});
  }
  for (auto algo : {BanditAlgorithm::exp3, BanditAlgorithm::exp4p, BanditAlgorithm::epoch_greedy, BanditAlgorithm::gts}) {
    const PolicySet& ps = algo == BanditAlgorithm::exp4p ? prob : det;
    BanditOptions opt;
    opt.horizon = 20;
    PolicyBandit b(algo, ps.size(), 6, opt);
    CHECK(b.algorithm() == algo);
    for (int t = 0; t < 200; ++t) {
      const Context ctx = testing::random_context(rng, 6, 3);
      const BanditChoice c = b.select(ctx, ps, rng);
      CHECK(c.arm < 6);
      CHECK(std::abs(c.distribution.sum() - 1.0) < 1e-9);
      CHECK((c.distribution.array() >= 0.0).all());
      b.update(ctx, ps, c, sample_uniform(rng));
      const Vector d = b.distribution(ctx, ps);
      CHECK(std::abs(d.sum() - 1.0) < 1e-9);
      const Vector lw = b.log_weights();
      CHECK(lw.allFinite());
    }
  }
  // GTS access through the wrapper.
  PolicyBandit g(BanditAlgorithm::gts, 4, 6, BanditOptions{20, std::nullopt, std::nullopt, 0.05, 3.0});
  CHECK(g.get<GeneralizedThompson>().eta() == 3.0);
  CHECK((normalize_log(g.log_weights()) - Vector::Constant(4, 0.25)).norm() < 1e-15);
}
