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

#include "lcb/orchestrator.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace lcb {

UserOutcome run_user(InteractiveAlgorithm& algo, UserSession& session) {
  UserOutcome out;
  out.user_id = session.user_id();
  out.latent_class = session.latent_class();
  algo.begin_user(session.user_id(), session.horizon());
  for (int t = 0; t < session.horizon(); ++t) {
    std::optional<Context> ctx = session.next_context();
    if (!ctx) {
      out.terminated_early = true;
      break;
    }
    const std::size_t arm = algo.select(*ctx);
    const std::optional<double> gap = session.regret(arm);
    const std::optional<double> reward = session.pull(arm);
    if (!reward) {
      out.terminated_early = true;
      break;
    }
    algo.observe(*reward);
    out.steps += 1;
    out.reward += *reward;
    if (gap) out.regret = out.regret.value_or(0.0) + *gap;
  }
  algo.end_user();
  return out;
}

void LcbConfig::validate() const {
  if (phase1_users < 0) throw std::invalid_argument("LcbConfig: phase1_users must be >= 0");
  if (retrain_every < 1) throw std::invalid_argument("LcbConfig: retrain_every must be >= 1");
  if (tau < 0) throw std::invalid_argument("LcbConfig: tau must be >= 0");
  if (max_models < 1) throw std::invalid_argument("LcbConfig: max_models must be >= 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("LcbConfig: temperature must be positive");
}

LcbConfig LcbConfig::analysis(int horizon) {
  LcbConfig cfg;
  cfg.phase1_mode = Phase1Mode::per_user;
  cfg.tau = static_cast<int>(std::lround(std::sqrt(static_cast<double>(std::max(horizon, 0)))));
  cfg.iid_only = true;
  cfg.bandit = BanditAlgorithm::exp3;
  return cfg;
}

LcbConfig LcbConfig::problem_dependent() {
  LcbConfig cfg;
  cfg.phase1_mode = Phase1Mode::per_user;
  cfg.tau = 3;
  cfg.iid_only = true;
  cfg.bandit = BanditAlgorithm::epoch_greedy;
  return cfg;
}

std::string to_string(Learner learner) { return learner == Learner::gibbs ? "gibbs" : "em"; }
std::string to_string(Phase1Mode mode) { return mode == Phase1Mode::shared ? "shared" : "per-user"; }

// -- PolicySession ------------------------------------------------------------

PolicySession::PolicySession(const LcbConfig& cfg, std::shared_ptr<const PolicySet> policies, int horizon)
    : tau_(cfg.tau), algo_(cfg.bandit), options_(cfg.bandit_options), policies_(std::move(policies)),
      horizon_(horizon) {
  if (!policies_ || policies_->empty()) throw std::invalid_argument("PolicySession: empty policy set");
  options_.horizon = horizon > 0 ? std::max(1, horizon - tau_) : 0;
}

std::size_t PolicySession::select(const Context& ctx, Rng& rng) {
  ++step_;
  ctx_ = ctx;
  if (step_ <= tau_) {
    last_iid_ = true;
    choice_ = BanditChoice{};
    choice_.arm = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(ctx.num_arms()));
    return choice_.arm;
  }
  last_iid_ = false;
  if (!bandit_) bandit_.emplace(algo_, policies_->size(), static_cast<std::size_t>(ctx.num_arms()), options_);
  choice_ = bandit_->select(ctx, *policies_, rng);
  return choice_.arm;
}

void PolicySession::observe(double reward) {
  if (!ctx_) throw std::logic_error("PolicySession: observe before select");
  if (!last_iid_) bandit_->update(*ctx_, *policies_, choice_, reward);
  ctx_.reset();
}

ServeResult serve_user(const LcbConfig& cfg, std::shared_ptr<const PolicySet> policies, UserSession& session,
                       InteractionLog& log, Rng& rng) {
  ServeResult result;
  PolicySession ps(cfg, std::move(policies), session.horizon());
  result.outcome.user_id = session.user_id();
  result.outcome.latent_class = session.latent_class();
  for (int t = 0; t < session.horizon(); ++t) {
    std::optional<Context> ctx = session.next_context();
    if (!ctx) {
      result.outcome.terminated_early = true;
      break;
    }
    const std::size_t arm = ps.select(*ctx, rng);
    const std::optional<double> gap = session.regret(arm);
    const std::optional<double> reward = session.pull(arm);
    if (!reward) {
      result.outcome.terminated_early = true;
      break;
    }
    ps.observe(*reward);
    log.append(InteractionRecord{session.user_id(), t + 1, Context(ctx->arms(), t + 1), arm, *reward,
                                 ps.last_was_iid()});
    result.rewards.push_back(*reward);
    result.outcome.steps += 1;
    result.outcome.reward += *reward;
    if (gap) result.outcome.regret = result.outcome.regret.value_or(0.0) + *gap;
  }
  if (ps.bandit()) result.final_bandit = *ps.bandit();
  return result;
}

// -- LatentContextualBandit ---------------------------------------------------

LatentContextualBandit::LatentContextualBandit(LcbConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed), rng_(derive_seed(seed, 0)) {
  cfg_.validate();
  log_.set_phase1_users(cfg_.phase1_users);
}

LatentContextualBandit::LatentContextualBandit(LcbConfig cfg, MixtureModel model, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed), rng_(derive_seed(seed, 0)), fixed_model_(true) {
  cfg_.phase1_users = 0;
  cfg_.validate();
  log_.set_phase1_users(0);
  policies_ = std::make_shared<const PolicySet>(build_policies(model, cfg_.policy_kind, cfg_.temperature));
  model_ = std::move(model);
}

void LatentContextualBandit::ingest(const InteractionLog& prior) {
  for (const auto& rec : prior.records()) log_.append(rec);
}

void LatentContextualBandit::ensure_linucb(Eigen::Index dim) {
  if (!linucb_ || linucb_->dim() != dim) linucb_.emplace(dim, cfg_.linucb);
}

void LatentContextualBandit::begin_user(int user_id, int horizon) {
  user_id_ = user_id;
  horizon_ = horizon;
  step_ = 0;
  ctx_.reset();
  session_.reset();
  phase1_user_ = !fixed_model_ && users_seen_ < cfg_.phase1_users;
  if (phase1_user_) {
    if (cfg_.phase1_mode == Phase1Mode::per_user) linucb_.reset();
    return;
  }
  if (!fixed_model_ && (!policies_ || users_since_train_ >= cfg_.retrain_every)) retrain();
  if (policies_) {
    session_.emplace(cfg_, policies_, horizon);
  } else {
    // No usable model yet: keep collecting data the phase-1 way.
    phase1_user_ = true;
    if (cfg_.phase1_mode == Phase1Mode::per_user) linucb_.reset();
  }
}

std::size_t LatentContextualBandit::select(const Context& ctx) {
  ++step_;
  ctx_ = ctx;
  if (!phase1_user_) {
    arm_ = session_->select(ctx, rng_);
    last_iid_ = session_->last_was_iid();
    return arm_;
  }
  ensure_linucb(ctx.dim());
  if (step_ <= cfg_.tau) {
    last_iid_ = true;
    arm_ = static_cast<std::size_t>(rng_() % static_cast<std::uint64_t>(ctx.num_arms()));
  } else {
    last_iid_ = false;
    arm_ = static_cast<std::size_t>(linucb_->select(ctx.arms()).arm);
  }
  return arm_;
}

void LatentContextualBandit::observe(double reward) {
  if (!ctx_) throw std::logic_error("LatentContextualBandit: observe before select");
  if (phase1_user_) {
    linucb_->update(ctx_->arms().row(static_cast<Eigen::Index>(arm_)).transpose(), reward);
  } else {
    session_->observe(reward);
  }
  log_.append(InteractionRecord{user_id_, step_, Context(ctx_->arms(), step_), arm_, reward, last_iid_});
  ctx_.reset();
}

void LatentContextualBandit::end_user() {
  ++users_seen_;
  if (!phase1_user_) ++users_since_train_;
}

bool LatentContextualBandit::retrain() {
  const std::vector<UserData> data = training_pairs(log_, cfg_.iid_only);
  users_since_train_ = 0;
  if (data.empty()) {
    warnings_.push_back("retrain skipped: no training data");
    return false;
  }
  const std::uint64_t learn_seed = derive_seed(seed_, 1000 + static_cast<std::uint64_t>(retrain_count_));
  try {
    MixtureModel model;
    if (cfg_.learner == Learner::gibbs) {
      std::vector<int> warm;
      if (cfg_.warm_start && !previous_partition_.empty()) {
        warm.reserve(data.size());
        for (const auto& u : data) {
          auto it = previous_partition_.find(u.user_id);
          warm.push_back(it == previous_partition_.end() ? -1 : it->second);
        }
      }
      GibbsResult result = run_gibbs(data, cfg_.gibbs, cfg_.max_models, learn_seed, warm);
      previous_partition_.clear();
      for (std::size_t u = 0; u < data.size(); ++u) previous_partition_[data[u].user_id] = result.partition[u];
      model = std::move(result.model);
    } else {
      const int components = static_cast<int>(std::min<std::size_t>(cfg_.max_models, data.size()));
      model = em_fit(data, components, learn_seed, cfg_.em).model;
    }
    policies_ = std::make_shared<const PolicySet>(build_policies(model, cfg_.policy_kind, cfg_.temperature));
    model_ = std::move(model);
    ++retrain_count_;
    return true;
  } catch (const std::exception& e) {
    warnings_.push_back(std::string("learner failed, keeping previous policies: ") + e.what());
    return false;
  }
}

std::vector<UserOutcome> run_phase1(LatentContextualBandit& lcb, Environment& env) {
  std::vector<UserOutcome> out;
  while (lcb.users_seen() < lcb.config().phase1_users) {
    std::unique_ptr<UserSession> session = env.next_user();
    if (!session) throw std::runtime_error("run_phase1: environment exhausted during phase 1");
    out.push_back(run_user(lcb, *session));
  }
  return out;
}

std::vector<UserOutcome> run_phase2(LatentContextualBandit& lcb, Environment& env, int max_users) {
  std::vector<UserOutcome> out;
  for (int served = 0; served < max_users; ++served) {
    std::unique_ptr<UserSession> session = env.next_user();
    if (!session) break;
    out.push_back(run_user(lcb, *session));
  }
  return out;
}

void write_user_metrics(std::ostream& out, const std::vector<UserOutcome>& outcomes) {
  out << "user_id,latent_class,steps,cumulative_reward,cumulative_regret\n";
  for (const auto& o : outcomes) {
    out << o.user_id << ',';
    if (o.latent_class) out << *o.latent_class;
    out << ',' << o.steps << ',' << o.reward << ',';
    if (o.regret) out << *o.regret;
    out << '\n';
  }
}

}  // namespace lcb
