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

#include "lcb/baselines.hpp"

namespace lcb {

std::size_t PopulationLinUcb::select(const Context& ctx) {
  if (!state_ || state_->dim() != ctx.dim()) state_.emplace(ctx.dim(), options_);
  const auto arm = state_->select(ctx.arms()).arm;
  last_x_ = ctx.arm(arm);
  return static_cast<std::size_t>(arm);
}

void PopulationLinUcb::observe(double reward) { state_->update(last_x_, reward); }

std::size_t IndividualLinUcb::select(const Context& ctx) {
  if (!state_ || state_->dim() != ctx.dim()) state_.emplace(ctx.dim(), options_);
  const auto arm = state_->select(ctx.arms()).arm;
  last_x_ = ctx.arm(arm);
  return static_cast<std::size_t>(arm);
}

void IndividualLinUcb::observe(double reward) { state_->update(last_x_, reward); }

}  // namespace lcb
