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

#include "lcb/sim_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lcb {

void SimSpec::validate() const {
  if (n_true < 1) throw std::invalid_argument("SimSpec: n_true must be >= 1");
  if (dim < 1 || arms < 1) throw std::invalid_argument("SimSpec: dim and arms must be >= 1");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("SimSpec: noise_sigma must be >= 0");
  if (horizon_min < 1 || horizon_max < horizon_min) throw std::invalid_argument("SimSpec: bad horizon range");
  if (!class_weights.empty() && static_cast<int>(class_weights.size()) != n_true) {
    throw std::invalid_argument("SimSpec: class_weights must have n_true entries");
  }
}

PlantedModels generate_models(const SimSpec& spec) {
  spec.validate();
  constexpr int kDominant = 4;
  if (spec.dim < kDominant) throw std::invalid_argument("generate_models: dim must be >= 4");
  Rng rng(derive_seed(spec.model_seed, 7));
  std::uniform_real_distribution<double> high(0.5, 1.0);
  std::uniform_real_distribution<double> low(0.0, 0.1);
  const bool disjoint = kDominant * spec.n_true <= spec.dim;

  std::vector<double> weights = spec.class_weights;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(spec.n_true), 1.0 / spec.n_true);
  double total = 0.0;
  for (double w : weights) total += w;

  std::vector<MixtureComponent> comps;
  for (int h = 0; h < spec.n_true; ++h) {
    Vector beta(spec.dim);
    for (int j = 0; j < spec.dim; ++j) beta(j) = low(rng);
    const int offset = disjoint ? kDominant * h : (h * spec.dim) / spec.n_true;
    for (int j = 0; j < kDominant; ++j) beta((offset + j) % spec.dim) = high(rng);
    beta.normalize();
    comps.push_back(MixtureComponent{weights[static_cast<std::size_t>(h)] / total, beta,
                                     std::max(spec.noise_sigma * spec.noise_sigma, 1e-12)});
  }
  PlantedModels out{MixtureModel(std::move(comps)), std::nullopt};
  if (spec.n_true >= 2) {
    out.min_separation = min_separation(out.model);
    if (!(*out.min_separation > 0.0)) throw std::runtime_error("generate_models: planted models coincide");
  }
  return out;
}

Context sample_context(const SimSpec& spec, Rng& rng, int step) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix arms(spec.arms, spec.dim);
  for (int a = 0; a < spec.arms; ++a) {
    double norm = 0.0;
    do {
      for (int j = 0; j < spec.dim; ++j) arms(a, j) = unif(rng);
      norm = arms.row(a).norm();
    } while (norm < 1e-12);
    arms.row(a) /= norm;
  }
  return Context(std::move(arms), step);
}

double sample_reward(const SimSpec& spec, const Vector& beta, const Vector& x, Rng& rng, ClipCounter* counter) {
  if (beta.size() != x.size()) throw std::invalid_argument("sample_reward: dimension mismatch");
  double r = beta.dot(x) + spec.noise_sigma * std::normal_distribution<double>(0.0, 1.0)(rng);
  if (counter) ++counter->draws;
  if (spec.clip_rewards && (r < 0.0 || r > 1.0)) {
    r = std::clamp(r, 0.0, 1.0);
    if (counter) ++counter->clipped;
  }
  return r;
}

double regret_step(const Vector& beta, const Context& ctx, std::size_t arm) {
  if (beta.size() != ctx.dim()) throw std::invalid_argument("regret_step: dimension mismatch");
  const Vector scores = ctx.arms() * beta;
  return std::max(0.0, scores.maxCoeff() - scores(static_cast<Eigen::Index>(arm)));
}

namespace {

class SimUserSession : public UserSession {
 public:
  SimUserSession(const SimSpec& spec, const MixtureModel& planted, std::uint64_t seed, int user_index,
                 std::shared_ptr<ClipCounter> clips)
      : spec_(spec), rng_(seed), user_id_(user_index + 1), clips_(std::move(clips)) {
    std::vector<double> w;
    for (const auto& c : planted.components()) w.push_back(c.pi);
    cls_ = static_cast<int>(sample_categorical(rng_, w));
    beta_ = planted[static_cast<std::size_t>(cls_)].beta;
    horizon_ = std::uniform_int_distribution<int>(spec.horizon_min, spec.horizon_max)(rng_);
  }

  int user_id() const override { return user_id_; }
  int horizon() const override { return horizon_; }
  std::optional<int> latent_class() const override { return cls_; }

  std::optional<Context> next_context() override {
    if (step_ >= horizon_) return std::nullopt;
    ++step_;
    ctx_ = sample_context(spec_, rng_, step_);
    noise_ = std::normal_distribution<double>(0.0, 1.0)(rng_);
    return ctx_;
  }

  std::optional<double> pull(std::size_t arm) override {
    if (!ctx_ || arm >= static_cast<std::size_t>(ctx_->num_arms())) return std::nullopt;
    double r = beta_.dot(ctx_->arm(static_cast<Eigen::Index>(arm))) + spec_.noise_sigma * noise_;
    ++clips_->draws;
    if (spec_.clip_rewards && (r < 0.0 || r > 1.0)) {
      r = std::clamp(r, 0.0, 1.0);
      ++clips_->clipped;
    }
    return r;
  }

  std::optional<double> regret(std::size_t arm) const override {
    if (!ctx_) return std::nullopt;
    return regret_step(beta_, *ctx_, arm);
  }

 private:
  SimSpec spec_;
  Rng rng_;
  int user_id_;
  int cls_ = 0;
  int horizon_ = 0;
  int step_ = 0;
  Vector beta_;
  std::optional<Context> ctx_;
  double noise_ = 0.0;
  std::shared_ptr<ClipCounter> clips_;
};

}  // namespace

SimEnvironment::SimEnvironment(SimSpec spec, MixtureModel planted, std::uint64_t seed, int num_users)
    : spec_(std::move(spec)), planted_(std::move(planted)), seed_(seed), num_users_(num_users),
      clips_(std::make_shared<ClipCounter>()) {
  spec_.validate();
  if (planted_.dim() != spec_.dim) throw std::invalid_argument("SimEnvironment: planted dimension mismatch");
}

std::unique_ptr<UserSession> SimEnvironment::next_user() {
  if (next_ >= num_users_) return nullptr;
  const int index = next_++;
  return std::make_unique<SimUserSession>(spec_, planted_, derive_seed(seed_, static_cast<std::uint64_t>(index)),
                                          index, clips_);
}

}  // namespace lcb
