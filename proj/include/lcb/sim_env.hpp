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

#ifndef LCB_SIM_ENV_HPP_
#define LCB_SIM_ENV_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "lcb/core.hpp"
#include "lcb/environment.hpp"
#include "lcb/latent_models.hpp"
#include "lcb/random.hpp"

namespace lcb {

struct SimSpec {
  int n_true = 5;
  int dim = 10;
  int arms = 20;
  double noise_sigma = 0.1;
  std::vector<double> class_weights;  // empty means uniform
  int horizon_min = 20;               // T_u drawn uniformly from [min, max]
  int horizon_max = 20;
  std::uint64_t model_seed = 1;       // seed of the planted coefficients
  bool clip_rewards = true;

  void validate() const;
};

struct PlantedModels {
  MixtureModel model;
  std::optional<double> min_separation;  // unset for a single class
};

// Each coefficient vector gets 4 dominant coordinates drawn from U[0.5, 1]
// (disjoint blocks when 4 N <= d, evenly offset overlapping blocks
// otherwise), U[0, 0.1] elsewhere, then is scaled to unit norm.
PlantedModels generate_models(const SimSpec& spec);

// K arms drawn uniformly from [-1, 1]^d and scaled to unit norm.
Context sample_context(const SimSpec& spec, Rng& rng, int step = 1);

struct ClipCounter {
  long draws = 0;
  long clipped = 0;
  double rate() const { return draws == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(draws); }
};

// beta^T x + N(0, sigma^2), clipped to [0, 1] when spec.clip_rewards is set.
double sample_reward(const SimSpec& spec, const Vector& beta, const Vector& x, Rng& rng,
                     ClipCounter* counter = nullptr);

// max_a beta^T x_a - beta^T x_arm.
double regret_step(const Vector& beta, const Context& ctx, std::size_t arm);

// Users arrive with a class drawn from the planted mixing weights.  The
// context and noise stream of user i depends only on (seed, i), so every
// algorithm faces the same users, contexts and noise.
class SimEnvironment : public Environment {
 public:
  SimEnvironment(SimSpec spec, MixtureModel planted, std::uint64_t seed, int num_users);

  std::unique_ptr<UserSession> next_user() override;

  const SimSpec& spec() const { return spec_; }
  const MixtureModel& planted() const { return planted_; }
  const ClipCounter& clip_counter() const { return *clips_; }
  int users_issued() const { return next_; }

 private:
  SimSpec spec_;
  MixtureModel planted_;
  std::uint64_t seed_;
  int num_users_;
  int next_ = 0;
  std::shared_ptr<ClipCounter> clips_;
};

}  // namespace lcb

#endif  // LCB_SIM_ENV_HPP_
