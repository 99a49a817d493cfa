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

#include "lcb/bandits.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lcb {

namespace {

Vector normalized(const Vector& log_weights) {
  Vector w = (log_weights.array() - log_weights.maxCoeff()).exp().matrix();
  return w / w.sum();
}

void check_reward(double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) throw std::invalid_argument("bandit update: reward outside [0, 1]");
}

std::size_t draw(Rng& rng, const Vector& p) {
  return sample_categorical(rng, std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

void recenter(Vector& log_weights) { log_weights.array() -= log_weights.maxCoeff(); }

}  // namespace

std::string to_string(BanditAlgorithm algo) {
  switch (algo) {
    case BanditAlgorithm::exp3: return "exp3";
    case BanditAlgorithm::exp4p: return "exp4p";
    case BanditAlgorithm::epoch_greedy: return "epoch-greedy";
    case BanditAlgorithm::gts: return "gts";
  }
  return "unknown";
}

BanditAlgorithm parse_bandit_algorithm(const std::string& name) {
  if (name == "exp3") return BanditAlgorithm::exp3;
  if (name == "exp4p") return BanditAlgorithm::exp4p;
  if (name == "epoch-greedy" || name == "epoch_greedy") return BanditAlgorithm::epoch_greedy;
  if (name == "gts") return BanditAlgorithm::gts;
  throw std::invalid_argument("unknown bandit algorithm: " + name);
}

// -- Exp3 ---------------------------------------------------------------------

Exp3::Exp3(std::size_t policies, double gamma)
    : gamma_(gamma), log_weights_(Vector::Zero(static_cast<Eigen::Index>(policies))) {
  if (policies == 0) throw std::invalid_argument("Exp3: need at least one policy");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("Exp3: gamma must lie in [0, 1]");
}

double Exp3::default_gamma(std::size_t policies, int horizon) {
  if (horizon <= 0) return kAnytimeGamma;
  const double n = static_cast<double>(policies);
  return std::min(1.0, std::sqrt(n * std::log(n) / ((std::numbers::e - 1.0) * horizon)));
}

Vector Exp3::distribution() const {
  const double n = static_cast<double>(size());
  return ((1.0 - gamma_) * normalized(log_weights_).array() + gamma_ / n).matrix();
}

BanditChoice Exp3::select(const Context& ctx, const PolicySet& policies, Rng& rng) const {
  if (policies.size() != size()) throw std::invalid_argument("Exp3: policy count mismatch");
  BanditChoice out;
  out.distribution = distribution();
  const std::size_t h = draw(rng, out.distribution);
  out.policy = h;
  out.arm = deterministic_action(policies[h], ctx);
  return out;
}

void Exp3::update(std::size_t policy, double reward) {
  check_reward(reward);
  if (policy >= size()) throw std::out_of_range("Exp3: policy index out of range");
  const double q = distribution()(static_cast<Eigen::Index>(policy));
  log_weights_(static_cast<Eigen::Index>(policy)) += gamma_ * (reward / q) / static_cast<double>(size());
  recenter(log_weights_);
}

// -- Exp4P --------------------------------------------------------------------

Exp4P::Exp4P(std::size_t policies, std::size_t arms, double p_min, double delta, int horizon)
    : arms_(arms), p_min_(p_min), delta_(delta), horizon_(horizon > 0 ? horizon : 100),
      log_weights_(Vector::Zero(static_cast<Eigen::Index>(policies))) {
  if (policies == 0 || arms == 0) throw std::invalid_argument("Exp4P: need policies and arms");
  if (!(p_min >= 0.0) || p_min * static_cast<double>(arms) > 1.0 + 1e-12) {
    throw std::invalid_argument("Exp4P: p_min * K must not exceed 1");
  }
  // Without a floor an expert's weight can underflow and its advice ratio
  // blow up; a single expert never needs one.
  if (policies > 1 && !(p_min > 0.0)) throw std::invalid_argument("Exp4P: p_min must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("Exp4P: delta must lie in (0, 1)");
}

double Exp4P::default_p_min(std::size_t policies, std::size_t arms, int horizon) {
  const double t = horizon > 0 ? horizon : 100;
  const double k = static_cast<double>(arms);
  return std::min(1.0 / k, std::sqrt(std::log(static_cast<double>(policies)) / (k * t)));
}

Vector Exp4P::expert_weights() const { return normalized(log_weights_); }

Matrix Exp4P::advice(const Context& ctx, const PolicySet& policies) {
  Matrix xi(static_cast<Eigen::Index>(policies.size()), ctx.num_arms());
  for (std::size_t h = 0; h < policies.size(); ++h) {
    const Policy& p = policies[h];
    if (p.kind == PolicyKind::probabilistic) {
      xi.row(static_cast<Eigen::Index>(h)) = probabilistic_action(p, ctx).transpose();
    } else {
      xi.row(static_cast<Eigen::Index>(h)).setZero();
      xi(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(deterministic_action(p, ctx))) = 1.0;
    }
  }
  return xi;
}

Vector Exp4P::arm_distribution(const Matrix& advice) const {
  if (advice.rows() != log_weights_.size() || advice.cols() != static_cast<Eigen::Index>(arms_)) {
    throw std::invalid_argument("Exp4P: advice shape mismatch");
  }
  const double k = static_cast<double>(arms_);
  Vector p = (1.0 - k * p_min_) * (advice.transpose() * expert_weights());
  p.array() += p_min_;
  return p / p.sum();
}

BanditChoice Exp4P::select(const Context& ctx, const PolicySet& policies, Rng& rng) const {
  BanditChoice out;
  out.distribution = arm_distribution(advice(ctx, policies));
  out.arm = draw(rng, out.distribution);
  return out;
}

void Exp4P::update(const Context& ctx, const PolicySet& policies, std::size_t arm, double reward) {
  update(advice(ctx, policies), arm, reward);
}

void Exp4P::update(const Matrix& advice, std::size_t arm, double reward) {
  check_reward(reward);
  if (arm >= arms_) throw std::out_of_range("Exp4P: arm index out of range");
  const Vector p = arm_distribution(advice);
  const auto a = static_cast<Eigen::Index>(arm);
  const double n = static_cast<double>(log_weights_.size());
  const double k = static_cast<double>(arms_);
  const double confidence = std::sqrt(std::log(n / delta_) / (k * horizon_));
  for (Eigen::Index h = 0; h < log_weights_.size(); ++h) {
    const double estimate = advice(h, a) * reward / p(a);
    double variance = 0.0;
    for (Eigen::Index b = 0; b < advice.cols(); ++b) {
      if (advice(h, b) > 0.0) variance += advice(h, b) / p(b);
    }
    log_weights_(h) += (p_min_ / 2.0) * (estimate + variance * confidence);
  }
  recenter(log_weights_);
}

// -- EpochGreedy --------------------------------------------------------------

EpochGreedy::EpochGreedy(std::size_t policies, std::size_t arms) : policies_(policies), arms_(arms) {
  if (policies == 0 || arms == 0) throw std::invalid_argument("EpochGreedy: need policies and arms");
}

Vector EpochGreedy::policy_estimates(const PolicySet& policies) const {
  Vector est = Vector::Zero(static_cast<Eigen::Index>(policies.size()));
  const double k = static_cast<double>(arms_);
  for (const auto& rec : records_) {
    for (std::size_t h = 0; h < policies.size(); ++h) {
      if (deterministic_action(policies[h], rec.context) == rec.arm) est(static_cast<Eigen::Index>(h)) += k * rec.reward;
    }
  }
  return est;
}

BanditChoice EpochGreedy::select(const Context& ctx, const PolicySet& policies, Rng& rng) const {
  if (policies.size() != policies_) throw std::invalid_argument("EpochGreedy: policy count mismatch");
  BanditChoice out;
  if (exploring()) {
    out.exploration = true;
    out.distribution = Vector::Constant(static_cast<Eigen::Index>(policies_), 1.0 / static_cast<double>(policies_));
    out.arm = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(ctx.num_arms()));
    return out;
  }
  const Vector est = policy_estimates(policies);
  Eigen::Index best = 0;
  for (Eigen::Index h = 1; h < est.size(); ++h) {
    if (est(h) > est(best)) best = h;
  }
  out.policy = static_cast<std::size_t>(best);
  out.distribution = Vector::Zero(est.size());
  out.distribution(best) = 1.0;
  out.arm = deterministic_action(policies[static_cast<std::size_t>(best)], ctx);
  return out;
}

void EpochGreedy::update(std::optional<ExplorationRecord> record) {
  if (exploring()) {
    if (record) records_.push_back(std::move(*record));
    position_ = 1;
    return;
  }
  if (position_ >= epoch_) {
    ++epoch_;
    position_ = 0;
  } else {
    ++position_;
  }
}

// -- GeneralizedThompson ------------------------------------------------------

GeneralizedThompson::GeneralizedThompson(std::size_t policies, double eta)
    : eta_(eta), log_weights_(Vector::Zero(static_cast<Eigen::Index>(policies))) {
  if (policies == 0) throw std::invalid_argument("GeneralizedThompson: need at least one policy");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("GeneralizedThompson: eta must be >= 0");
}

Vector GeneralizedThompson::distribution() const { return normalized(log_weights_); }

BanditChoice GeneralizedThompson::select(const Context& ctx, const PolicySet& policies, Rng& rng) const {
  if (policies.size() != static_cast<std::size_t>(log_weights_.size())) {
    throw std::invalid_argument("GeneralizedThompson: policy count mismatch");
  }
  BanditChoice out;
  out.distribution = distribution();
  const std::size_t h = draw(rng, out.distribution);
  out.policy = h;
  out.arm = deterministic_action(policies[h], ctx);
  return out;
}

void GeneralizedThompson::update(const Vector& predictions, double reward) {
  if (predictions.size() != log_weights_.size()) throw std::invalid_argument("GeneralizedThompson: prediction count mismatch");
  if (!std::isfinite(reward) || !predictions.allFinite()) throw std::invalid_argument("GeneralizedThompson: non-finite input");
  log_weights_.array() -= eta_ * (reward - predictions.array()).square();
  recenter(log_weights_);
}

// -- PolicyBandit -------------------------------------------------------------

namespace {

std::variant<Exp3, Exp4P, EpochGreedy, GeneralizedThompson> make_impl(BanditAlgorithm algo, std::size_t policies,
                                                                     std::size_t arms, const BanditOptions& o) {
  switch (algo) {
    case BanditAlgorithm::exp3:
      return Exp3(policies, o.exp3_gamma.value_or(Exp3::default_gamma(policies, o.horizon)));
    case BanditAlgorithm::exp4p:
      return Exp4P(policies, arms, o.p_min.value_or(Exp4P::default_p_min(policies, arms, o.horizon)), o.delta,
                   o.horizon);
    case BanditAlgorithm::epoch_greedy:
      return EpochGreedy(policies, arms);
    case BanditAlgorithm::gts:
      return GeneralizedThompson(policies, o.gts_eta);
  }
  throw std::invalid_argument("unknown bandit algorithm");
}

}  // namespace

PolicyBandit::PolicyBandit(BanditAlgorithm algo, std::size_t policies, std::size_t arms, const BanditOptions& options)
    : algo_(algo), impl_(make_impl(algo, policies, arms, options)) {}

BanditChoice PolicyBandit::select(const Context& ctx, const PolicySet& policies, Rng& rng) const {
  return std::visit([&](const auto& b) { return b.select(ctx, policies, rng); }, impl_);
}

void PolicyBandit::update(const Context& ctx, const PolicySet& policies, const BanditChoice& choice, double reward) {
  switch (algo_) {
    case BanditAlgorithm::exp3:
      std::get<Exp3>(impl_).update(choice.policy.value(), reward);
      break;
    case BanditAlgorithm::exp4p:
      std::get<Exp4P>(impl_).update(ctx, policies, choice.arm, reward);
      break;
    case BanditAlgorithm::epoch_greedy: {
      auto& eg = std::get<EpochGreedy>(impl_);
      if (choice.exploration) {
        eg.update(ExplorationRecord{ctx, choice.arm, reward});
      } else {
        eg.update(std::nullopt);
      }
      break;
    }
    case BanditAlgorithm::gts: {
      Vector predictions(static_cast<Eigen::Index>(policies.size()));
      const auto x = ctx.arms().row(static_cast<Eigen::Index>(choice.arm));
      for (std::size_t h = 0; h < policies.size(); ++h) predictions(static_cast<Eigen::Index>(h)) = x.dot(policies[h].beta);
      std::get<GeneralizedThompson>(impl_).update(predictions, reward);
      break;
    }
  }
}

Vector PolicyBandit::distribution(const Context& ctx, const PolicySet& policies) const {
  switch (algo_) {
    case BanditAlgorithm::exp3: return std::get<Exp3>(impl_).distribution();
    case BanditAlgorithm::exp4p: {
      const auto& b = std::get<Exp4P>(impl_);
      return b.arm_distribution(Exp4P::advice(ctx, policies));
    }
    case BanditAlgorithm::epoch_greedy: {
      Rng unused(0);
      return std::get<EpochGreedy>(impl_).select(ctx, policies, unused).distribution;
    }
    case BanditAlgorithm::gts: return std::get<GeneralizedThompson>(impl_).distribution();
  }
  return {};
}

Vector PolicyBandit::log_weights() const {
  switch (algo_) {
    case BanditAlgorithm::exp3: return std::get<Exp3>(impl_).log_weights();
    case BanditAlgorithm::exp4p: return std::get<Exp4P>(impl_).log_weights();
    case BanditAlgorithm::epoch_greedy: return {};
    case BanditAlgorithm::gts: return std::get<GeneralizedThompson>(impl_).log_weights();
  }
  return {};
}

}  // namespace lcb
