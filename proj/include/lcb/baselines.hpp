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

#ifndef LCB_BASELINES_HPP_
#define LCB_BASELINES_HPP_

#include <cstdint>
#include <optional>

#include "lcb/environment.hpp"
#include "lcb/linucb.hpp"
#include "lcb/random.hpp"

namespace lcb {

// One LinUCB instance shared by every user.
class PopulationLinUcb : public InteractiveAlgorithm {
 public:
  explicit PopulationLinUcb(LinUcbOptions options = {}) : options_(options) {}

  void begin_user(int, int) override {}
  std::size_t select(const Context& ctx) override;
  void observe(double reward) override;

  const std::optional<LinUcbd>& state() const { return state_; }

 private:
  LinUcbOptions options_;
  std::optional<LinUcbd> state_;
  Vector last_x_;
};

// A fresh LinUCB instance for each user.
class IndividualLinUcb : public InteractiveAlgorithm {
 public:
  explicit IndividualLinUcb(LinUcbOptions options = {}) : options_(options) {}

  void begin_user(int, int) override { state_.reset(); }
  std::size_t select(const Context& ctx) override;
  void observe(double reward) override;

 private:
  LinUcbOptions options_;
  std::optional<LinUcbd> state_;
  Vector last_x_;
};

class UniformRandom : public InteractiveAlgorithm {
 public:
  explicit UniformRandom(std::uint64_t seed) : rng_(seed) {}

  void begin_user(int, int) override {}
  std::size_t select(const Context& ctx) override {
    return static_cast<std::size_t>(rng_() % static_cast<std::uint64_t>(ctx.num_arms()));
  }
  void observe(double) override {}

 private:
  Rng rng_;
};

}  // namespace lcb

#endif  // LCB_BASELINES_HPP_
