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


#include <doctest.h>

#include <cmath>
#include <set>

#include "lcb/baselines.hpp"
#include "lcb/environment.hpp"
#include "lcb/latent_models.hpp"
#include "lcb/sim_env.hpp"

using namespace lcb;

namespace {

// Always plays the arm the user's true coefficients rank highest.
class OracleAlgorithm : public InteractiveAlgorithm {
 public:
  explicit OracleAlgorithm(const MixtureModel& model) : model_(model) {}
  void set_class(int cls) { cls_ = cls; }
  void begin_user(int, int) override {}
  std::size_t select(const Context& ctx) override {
    Policy p{PolicyKind::deterministic, model_[static_cast<std::size_t>(cls_)].beta, 1.0};
    return deterministic_action(p, ctx);
  }
  void observe(double) override {}

 private:
  const MixtureModel& model_;
  int cls_ = 0;
};

// Records every context it sees and plays arm 0.
class Recorder : public InteractiveAlgorithm {
 public:
  std::vector<Context> seen;
  void begin_user(int, int) override {}
  std::size_t select(const Context& ctx) override {
    seen.push_back(ctx);
    return 0;
  }
  void observe(double) override {}
};

}  // namespace

TEST_CASE("planted models have four dominant coordinates each") {
  SimSpec spec;
  const PlantedModels pm = generate_models(spec);
  REQUIRE(pm.model.size() == 5);
  std::set<int> used;
  for (const auto& c : pm.model.components()) {
    CHECK(c.beta.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.pi == doctest::Approx(0.2));
    int big = 0;
    for (Eigen::Index j = 0; j < c.beta.size(); ++j) {
      CHECK(c.beta(j) >= 0.0);
      if (c.beta(j) > 0.2) {
        ++big;
        used.insert(static_cast<int>(j));
      }
    }
    CHECK(big == 4);
  }
  CHECK(used.size() == 10);  // overlapping blocks cover every coordinate
  REQUIRE(pm.min_separation.has_value());
  CHECK(*pm.min_separation == doctest::Approx(min_separation(pm.model)));
  CHECK(*pm.min_separation > 0.3);
}

TEST_CASE("a single planted class has no separation") {
  SimSpec spec;
  spec.n_true = 1;
  const PlantedModels pm = generate_models(spec);
  CHECK(pm.model.size() == 1);
  CHECK_FALSE(pm.min_separation.has_value());
}

TEST_CASE("planted models are a function of the model seed") {
  SimSpec a;
  SimSpec b;
  CHECK(generate_models(a).model == generate_models(b).model);
  b.model_seed = 2;
  CHECK_FALSE(generate_models(a).model == generate_models(b).model);
}

TEST_CASE("spec validation") {
  SimSpec spec;
  spec.n_true = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SimSpec{};
  spec.horizon_min = 5;
  spec.horizon_max = 4;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SimSpec{};
  spec.class_weights = {1.0, 2.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SimSpec{};
  spec.noise_sigma = -0.1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("sampled contexts are unit norm and centered") {
  SimSpec spec;
  Rng rng(3);
  const int draws = 5000;  // 5000 contexts x 20 arms = 1e5 arm vectors
  Vector sum = Vector::Zero(spec.dim);
  Vector sum_sq = Vector::Zero(spec.dim);
  long count = 0;
  for (int i = 0; i < draws; ++i) {
    const Context ctx = sample_context(spec, rng, 7);
    CHECK(ctx.step() == 7);
    REQUIRE(ctx.num_arms() == spec.arms);
    for (Eigen::Index a = 0; a < ctx.num_arms(); ++a) {
      const Vector x = ctx.arm(a);
      REQUIRE(std::abs(x.norm() - 1.0) <= 1e-12);
      sum += x;
      sum_sq += x.cwiseProduct(x);
      ++count;
    }
  }
  const Vector mean = sum / static_cast<double>(count);
  for (Eigen::Index j = 0; j < spec.dim; ++j) {
    const double var = sum_sq(j) / static_cast<double>(count) - mean(j) * mean(j);
    const double se = std::sqrt(var / static_cast<double>(count));
    CHECK(std::abs(mean(j)) <= 3.0 * se);
  }
}

TEST_CASE("rewards: exact without noise, unbiased with noise") {
  SimSpec spec;
  Rng rng(5);
  Vector beta = Vector::Zero(spec.dim);
  beta(0) = 1.0;
  Vector x = Vector::Zero(spec.dim);
  x(0) = 0.4;

  SUBCASE("zero noise") {
    spec.noise_sigma = 0.0;
    CHECK(sample_reward(spec, beta, x, rng) == 0.4);
    CHECK(sample_reward(spec, beta, -x, rng) == 0.0);  // clipped
    ClipCounter clips;
    sample_reward(spec, beta, -x, rng, &clips);
    sample_reward(spec, beta, x, rng, &clips);
    CHECK(clips.draws == 2);
    CHECK(clips.clipped == 1);
    CHECK(clips.rate() == 0.5);
  }
  SUBCASE("mean of noisy draws") {
    spec.clip_rewards = false;
    const int n = 10000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_reward(spec, beta, x, rng);
    CHECK(std::abs(sum / n - 0.4) <= 3.0 * spec.noise_sigma / 100.0);
  }
  CHECK_THROWS_AS(sample_reward(spec, beta, Vector::Zero(3), rng), std::invalid_argument);
}

TEST_CASE("regret step examples") {
  Matrix arms(3, 2);
  arms << 1, 0, 0, 1, 0.6, 0.8;
  const Context ctx(arms);
  Vector beta(2);
  beta << 0.3, 0.5;
  // scores 0.3, 0.5, 0.58
  CHECK(regret_step(beta, ctx, 2) == 0.0);
  CHECK(regret_step(beta, ctx, 0) == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(regret_step(beta, ctx, 1) == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("the oracle policy incurs zero regret") {
  SimSpec spec;
  const PlantedModels pm = generate_models(spec);
  SimEnvironment env(spec, pm.model, 11, 50);
  OracleAlgorithm oracle(pm.model);
  int served = 0;
  while (auto session = env.next_user()) {
    oracle.set_class(*session->latent_class());
    const UserOutcome o = run_user(oracle, *session);
    CHECK(o.steps == 20);
    REQUIRE(o.regret.has_value());
    CHECK(*o.regret == 0.0);
    ++served;
  }
  CHECK(served == 50);
  CHECK(env.clip_counter().draws == 50 * 20);
}

TEST_CASE("every algorithm faces the same users and contexts") {
  SimSpec spec;
  spec.horizon_min = 3;
  spec.horizon_max = 9;
  const PlantedModels pm = generate_models(spec);

  Recorder first;
  Recorder second;
  std::vector<int> classes_a, classes_b, ids;
  {
    SimEnvironment env(spec, pm.model, 21, 30);
    while (auto s = env.next_user()) {
      classes_a.push_back(*s->latent_class());
      ids.push_back(s->user_id());
      run_user(first, *s);
    }
  }
  {
    // A different algorithm pulls different arms; the stream must not change.
    SimEnvironment env(spec, pm.model, 21, 30);
    PopulationLinUcb pop;
    Recorder probe;
    while (auto s = env.next_user()) {
      classes_b.push_back(*s->latent_class());
      auto ctx = s->next_context();
      while (ctx) {
        probe.seen.push_back(*ctx);
        s->pull(pop.select(*ctx));
        pop.observe(0.0);
        ctx = s->next_context();
      }
    }
    second = probe;
  }
  CHECK(classes_a == classes_b);
  REQUIRE(first.seen.size() == second.seen.size());
  for (std::size_t i = 0; i < first.seen.size(); ++i) REQUIRE(first.seen[i] == second.seen[i]);
  CHECK(ids.front() == 1);
  CHECK(ids.back() == 30);
  std::set<int> classes(classes_a.begin(), classes_a.end());
  CHECK(classes.size() >= 4);
}

TEST_CASE("environment rejects a planted model of the wrong dimension") {
  SimSpec spec;
  MixtureModel small({{1.0, Vector::Ones(3) / std::sqrt(3.0), 0.01}});
  CHECK_THROWS_AS(SimEnvironment(spec, small, 1, 5), std::invalid_argument);
}
