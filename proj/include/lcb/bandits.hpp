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

#ifndef LCB_BANDITS_HPP_
#define LCB_BANDITS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lcb/core.hpp"
#include "lcb/latent_models.hpp"
#include "lcb/random.hpp"

namespace lcb {

// Algorithms that learn, per user, which of N fixed policies to follow.
// Weights are stored as logarithms and exposed distributions are normalized
// with max subtraction, so they stay finite for any reward sequence.

enum class BanditAlgorithm { exp3, exp4p, epoch_greedy, gts };

std::string to_string(BanditAlgorithm algo);
BanditAlgorithm parse_bandit_algorithm(const std::string& name);

struct BanditOptions {
  int horizon = 0;                   // T_u when known, 0 otherwise
  std::optional<double> exp3_gamma;  // derived from the horizon when unset
  std::optional<double> p_min;       // derived from the horizon when unset
  double delta = 0.05;               // EXP4.P confidence parameter
  double gts_eta = 1.0;
};

struct BanditChoice {
  std::size_t arm = 0;
  std::optional<std::size_t> policy;  // unset when the arm is not tied to one policy
  Vector distribution;                // over policies (EXP3, GTS) or arms (EXP4.P)
  bool exploration = false;
};

class Exp3 {
 public:
  static constexpr double kAnytimeGamma = 0.1;

  Exp3(std::size_t policies, double gamma);
  // min(1, sqrt(N ln N / ((e - 1) T))) for a known horizon T, else 0.1.
  static double default_gamma(std::size_t policies, int horizon);

  std::size_t size() const { return static_cast<std::size_t>(log_weights_.size()); }
  double gamma() const { return gamma_; }
  const Vector& log_weights() const { return log_weights_; }
  // q_h = (1 - gamma) w_h / sum(w) + gamma / N.
  Vector distribution() const;

  BanditChoice select(const Context& ctx, const PolicySet& policies, Rng& rng) const;
  // Importance-weighted update of the chosen policy only:
  // w_h <- w_h exp(gamma (r / q_h) / N).
  void update(std::size_t policy, double reward);

 private:
  double gamma_;
  Vector log_weights_;
};

class Exp4P {
 public:
  Exp4P(std::size_t policies, std::size_t arms, double p_min, double delta, int horizon);
  // sqrt(ln N / (K T)) capped at 1/K; T defaults to 100 when unknown.
  static double default_p_min(std::size_t policies, std::size_t arms, int horizon);

  double p_min() const { return p_min_; }
  const Vector& log_weights() const { return log_weights_; }
  Vector expert_weights() const;

  // Advice matrix (policies x arms) of probabilistic policies.
  static Matrix advice(const Context& ctx, const PolicySet& policies);
  // p_a = (1 - K p_min) sum_h (w_h / sum w) xi_{h,a} + p_min.
  Vector arm_distribution(const Matrix& advice) const;

  BanditChoice select(const Context& ctx, const PolicySet& policies, Rng& rng) const;
  void update(const Context& ctx, const PolicySet& policies, std::size_t arm, double reward);
  void update(const Matrix& advice, std::size_t arm, double reward);

 private:
  std::size_t arms_;
  double p_min_;
  double delta_;
  int horizon_;
  Vector log_weights_;
};

struct ExplorationRecord {
  Context context;
  std::size_t arm = 0;
  double reward = 0.0;
};

// Epoch l consists of one uniform exploration step followed by l exploitation
// steps that follow the policy with the highest importance-weighted reward
// on the stored exploration records.
class EpochGreedy {
 public:
  EpochGreedy(std::size_t policies, std::size_t arms);

  int epoch() const { return epoch_; }
  bool exploring() const { return position_ == 0; }
  const std::vector<ExplorationRecord>& records() const { return records_; }

  // Importance-weighted empirical reward of every policy (weight K).
  Vector policy_estimates(const PolicySet& policies) const;

  BanditChoice select(const Context& ctx, const PolicySet& policies, Rng& rng) const;
  // Advances the schedule; pass the record from an exploration step.
  void update(std::optional<ExplorationRecord> record);

 private:
  std::size_t policies_;
  std::size_t arms_;
  int epoch_ = 1;
  int position_ = 0;  // 0 explores, 1..epoch exploit
  std::vector<ExplorationRecord> records_;
};

// Generalized Thompson Sampling with squared loss on each policy's reward
// prediction: w_h <- w_h exp(-eta (r - beta_h^T x)^2).
class GeneralizedThompson {
 public:
  GeneralizedThompson(std::size_t policies, double eta);

  double eta() const { return eta_; }
  const Vector& log_weights() const { return log_weights_; }
  Vector distribution() const;

  BanditChoice select(const Context& ctx, const PolicySet& policies, Rng& rng) const;
  // `predictions` holds beta_h^T x for the played arm, one per policy.
  void update(const Vector& predictions, double reward);

 private:
  double eta_;
  Vector log_weights_;
};

// Per-user instance of the configured algorithm.
class PolicyBandit {
 public:
  PolicyBandit(BanditAlgorithm algo, std::size_t policies, std::size_t arms, const BanditOptions& options);

  BanditAlgorithm algorithm() const { return algo_; }
  BanditChoice select(const Context& ctx, const PolicySet& policies, Rng& rng) const;
  void update(const Context& ctx, const PolicySet& policies, const BanditChoice& choice, double reward);

  // Current selection distribution (policies, or arms for EXP4.P given ctx).
  Vector distribution(const Context& ctx, const PolicySet& policies) const;
  // Log-domain weights for algorithms that keep them; empty otherwise.
  Vector log_weights() const;

  template <typename T>
  const T& get() const { return std::get<T>(impl_); }

 private:
  BanditAlgorithm algo_;
  std::variant<Exp3, Exp4P, EpochGreedy, GeneralizedThompson> impl_;
};

}  // namespace lcb

#endif  // LCB_BANDITS_HPP_
