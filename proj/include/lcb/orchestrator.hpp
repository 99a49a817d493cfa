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

#ifndef LCB_ORCHESTRATOR_HPP_
#define LCB_ORCHESTRATOR_HPP_

#include <climits>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcb/bandits.hpp"
#include "lcb/core.hpp"
#include "lcb/em.hpp"
#include "lcb/environment.hpp"
#include "lcb/gibbs.hpp"
#include "lcb/latent_models.hpp"
#include "lcb/linucb.hpp"
#include "lcb/random.hpp"

namespace lcb {

enum class Phase1Mode { shared, per_user };
enum class Learner { gibbs, em };

struct LcbConfig {
  static constexpr int kNever = INT_MAX;

  int phase1_users = 50;         // J
  std::size_t max_models = 10;   // cap on learned latent models
  int retrain_every = 50;        // phase-2 users between trainings; kNever = train once
  int tau = 0;                   // uniform-random steps at the start of every user
  Phase1Mode phase1_mode = Phase1Mode::shared;
  Learner learner = Learner::gibbs;
  PolicyKind policy_kind = PolicyKind::deterministic;
  double temperature = 1.0;
  BanditAlgorithm bandit = BanditAlgorithm::gts;
  BanditOptions bandit_options;  // horizon is filled in per user
  bool iid_only = false;         // train only on the uniform-random records
  bool warm_start = true;        // seed the sampler with the previous partition
  LinUcbOptions linucb;
  GibbsOptions gibbs;
  EmOptions em;

  void validate() const;

  // Problem-independent analysis setting: per-user LinUCB in phase 1,
  // tau = round(sqrt(T_u)), i.i.d.-only training, EXP3 over the policies.
  static LcbConfig analysis(int horizon);
  // Problem-dependent analysis setting: tau = 3 with Epoch-Greedy.
  static LcbConfig problem_dependent();
};

std::string to_string(Learner learner);
std::string to_string(Phase1Mode mode);

// Serves one user from a fixed policy set: the first tau steps pick arms
// uniformly at random, the remaining steps follow the configured bandit.
class PolicySession {
 public:
  PolicySession(const LcbConfig& cfg, std::shared_ptr<const PolicySet> policies, int horizon);

  std::size_t select(const Context& ctx, Rng& rng);
  void observe(double reward);

  bool last_was_iid() const { return last_iid_; }
  int steps() const { return step_; }
  const PolicySet& policies() const { return *policies_; }
  // Null until the first bandit-driven step.
  const PolicyBandit* bandit() const { return bandit_ ? &*bandit_ : nullptr; }

 private:
  int tau_;
  BanditAlgorithm algo_;
  BanditOptions options_;
  std::shared_ptr<const PolicySet> policies_;
  int horizon_;
  int step_ = 0;
  bool last_iid_ = false;
  std::optional<PolicyBandit> bandit_;
  std::optional<Context> ctx_;
  BanditChoice choice_;
};

struct ServeResult {
  UserOutcome outcome;
  std::vector<double> rewards;
  std::optional<PolicyBandit> final_bandit;
};

// Runs a whole session against a fixed policy set, appending to `log`.
ServeResult serve_user(const LcbConfig& cfg, std::shared_ptr<const PolicySet> policies, UserSession& session,
                       InteractionLog& log, Rng& rng);

// Latent Contextual Bandits.  The first J users are served by LinUCB while
// their interactions are collected; afterwards latent models are learned from
// the log, one policy is built per model, and each new user is served by a
// fresh policy-selection bandit over that (snapshotted) policy set.
class LatentContextualBandit : public InteractiveAlgorithm {
 public:
  LatentContextualBandit(LcbConfig cfg, std::uint64_t seed);
  // Skips phase 1 and learning: serves every user from `model` (the
  // ground-truth variant when given the planted model).
  LatentContextualBandit(LcbConfig cfg, MixtureModel model, std::uint64_t seed);

  void begin_user(int user_id, int horizon) override;
  std::size_t select(const Context& ctx) override;
  void observe(double reward) override;
  void end_user() override;

  // Adds prior interactions (e.g. an ingested log) to the training data.
  void ingest(const InteractionLog& prior);
  // Learns a new model from the current log now.  Returns false, keeping the
  // previous policies, if the learner fails.
  bool retrain();

  const LcbConfig& config() const { return cfg_; }
  const InteractionLog& log() const { return log_; }
  int users_seen() const { return users_seen_; }
  bool serving_phase1() const { return phase1_user_; }
  int retrain_count() const { return retrain_count_; }
  const std::optional<MixtureModel>& model() const { return model_; }
  std::shared_ptr<const PolicySet> policies() const { return policies_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  // Bandit state of the current (or just finished) phase-2 session.
  const PolicySession* session() const { return session_ ? &*session_ : nullptr; }

 private:
  void ensure_linucb(Eigen::Index dim);

  LcbConfig cfg_;
  std::uint64_t seed_;
  Rng rng_;
  InteractionLog log_;
  bool fixed_model_ = false;
  std::optional<MixtureModel> model_;
  std::shared_ptr<const PolicySet> policies_;
  std::optional<LinUcbd> linucb_;
  std::unordered_map<int, int> previous_partition_;

  int users_seen_ = 0;
  int users_since_train_ = 0;
  int retrain_count_ = 0;
  std::vector<std::string> warnings_;

  // Current user.
  int user_id_ = 0;
  int horizon_ = 0;
  int step_ = 0;
  bool phase1_user_ = false;
  bool last_iid_ = false;
  std::optional<Context> ctx_;
  std::size_t arm_ = 0;
  std::optional<PolicySession> session_;
};

// Serves the J phase-1 users.  Throws std::runtime_error if the environment
// runs out of users first.
std::vector<UserOutcome> run_phase1(LatentContextualBandit& lcb, Environment& env);

// Serves phase-2 users until the environment is exhausted or `max_users`
// users have been served.
std::vector<UserOutcome> run_phase2(LatentContextualBandit& lcb, Environment& env, int max_users = INT_MAX);

// Metrics stream: user_id, latent_class, steps, cumulative_reward,
// cumulative_regret (empty fields when unknown).
void write_user_metrics(std::ostream& out, const std::vector<UserOutcome>& outcomes);

}  // namespace lcb

#endif  // LCB_ORCHESTRATOR_HPP_
