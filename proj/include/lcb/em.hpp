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

#ifndef LCB_EM_HPP_
#define LCB_EM_HPP_

#include <cstdint>
#include <vector>

#include "lcb/core.hpp"
#include "lcb/latent_models.hpp"

namespace lcb {

struct EmOptions {
  int iterations = 200;
  // Ridge penalty in the weighted least-squares M-step.  The tracked
  // objective includes the matching -ridge/2 * |beta_h|^2 / sigma2_h term, so
  // it is exactly non-decreasing.
  double ridge = 1e-6;
  // Stop once an iteration improves the objective by less than this
  // (relative to 1 + |objective|).
  double tolerance = 1e-12;
  double min_variance = 1e-6;
  // Components whose responsibility mass falls below this are re-seeded from
  // a random user.
  double collapse_mass = 1e-8;
};

struct EmResult {
  MixtureModel model;
  std::vector<double> objective;  // one entry per evaluated parameter set
  int iterations = 0;
  int reseeds = 0;
};

// Record-level EM for a finite mixture of linear regressions.  Initial
// coefficients come from k-means++ over per-user ridge fits.
EmResult em_fit(const std::vector<UserData>& data, int components, std::uint64_t seed,
                const EmOptions& options = {});

// Sum over records of log sum_h pi_h N(r | beta_h^T x, sigma2_h).
double mixture_log_likelihood(const MixtureModel& model, const std::vector<UserData>& data);

}  // namespace lcb

#endif  // LCB_EM_HPP_
