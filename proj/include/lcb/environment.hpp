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

#ifndef LCB_ENVIRONMENT_HPP_
#define LCB_ENVIRONMENT_HPP_

#include <cstddef>
#include <memory>
#include <optional>

#include "lcb/core.hpp"

namespace lcb {

// One user's interactive session.  Contexts are requested step by step; a
// session may end before its horizon when it cannot produce a context or a
// reward (offline replay with exhausted data).
class UserSession {
 public:
  virtual ~UserSession() = default;

  virtual int user_id() const = 0;
  virtual int horizon() const = 0;
  virtual std::optional<Context> next_context() = 0;
  // Reward for pulling `arm` in the most recent context.
  virtual std::optional<double> pull(std::size_t arm) = 0;
  // Expected-reward gap of `arm` against the best arm of the most recent
  // context, when the environment knows the user's true model.
  virtual std::optional<double> regret(std::size_t /*arm*/) const { return std::nullopt; }
  virtual std::optional<int> latent_class() const { return std::nullopt; }
};

class Environment {
 public:
  virtual ~Environment() = default;
  // Null once no users remain.
  virtual std::unique_ptr<UserSession> next_user() = 0;
};

// An interactive recommender driven one user at a time.
class InteractiveAlgorithm {
 public:
  virtual ~InteractiveAlgorithm() = default;

  virtual void begin_user(int user_id, int horizon) = 0;
  virtual std::size_t select(const Context& ctx) = 0;
  virtual void observe(double reward) = 0;
  virtual void end_user() {}
};

struct UserOutcome {
  int user_id = 0;
  std::optional<int> latent_class;
  int steps = 0;
  double reward = 0.0;
  std::optional<double> regret;
  bool terminated_early = false;
};

// Runs `algo` through one session until the horizon or early termination.
UserOutcome run_user(InteractiveAlgorithm& algo, UserSession& session);

}  // namespace lcb

#endif  // LCB_ENVIRONMENT_HPP_
