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

#ifndef LCB_GIBBS_HPP_
#define LCB_GIBBS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lcb/core.hpp"
#include "lcb/latent_models.hpp"
#include "lcb/nig.hpp"
#include "lcb/random.hpp"

namespace lcb {

// Collapsed Gibbs sampler for a Dirichlet-process mixture of linear
// regressions.  Every user carries one cluster label; all of a user's
// records move together.

enum class PartitionSummary { last_sweep, map_over_sweeps };

struct GibbsOptions {
  // Base measure; unset means w0 = 0, V0 = prior_scale * I, a0 = prior_shape,
  // b0 = prior_rate.
  std::optional<NigPriord> prior;
  double prior_scale = 1.0;
  double prior_shape = 1.0;
  double prior_rate = 1.0;
  double alpha = 1.0;
  double alpha_shape = 1.0;  // Gamma(shape, rate) prior on alpha
  double alpha_rate = 1.0;
  bool resample_alpha = true;
  int burn_in = 100;
  int retained = 100;
  PartitionSummary summary = PartitionSummary::last_sweep;
};

// The base measure `options` describes for dimension d.
NigPriord base_measure(const GibbsOptions& options, Eigen::Index d);

struct GibbsCluster {
  RegressionStatsd stats;
  int users = 0;
  double log_marginal = 0.0;  // cached NigEvidence::log_marginal(stats)
};

// Cluster slots with users == 0 are free and reused; labels in
// `assignments` index into `clusters`.
struct GibbsState {
  std::vector<int> assignments;
  std::vector<GibbsCluster> clusters;
  std::vector<int> free_slots;
  double alpha = 1.0;
  double alpha_shape = 1.0;
  double alpha_rate = 1.0;

  std::size_t num_users() const { return assignments.size(); }
  std::size_t num_clusters() const;
  // Labels renumbered 0, 1, ... by first appearance.
  std::vector<int> canonical_partition() const;
};

std::vector<RegressionStatsd> user_statistics(const std::vector<UserData>& data);

// Builds a state from explicit labels (any non-negative integers).
GibbsState make_state(const NigEvidence<double>& evidence, const std::vector<RegressionStatsd>& users,
                      const std::vector<int>& labels, double alpha, double alpha_shape = 1.0,
                      double alpha_rate = 1.0);

// Seats users one at a time from the sequential CRP conditional.  Users with
// a non-negative `warm_start` label are seated there first.
GibbsState initialize_gibbs(const NigEvidence<double>& evidence, const std::vector<RegressionStatsd>& users,
                            double alpha, double alpha_shape, double alpha_rate, Rng& rng,
                            const std::vector<int>& warm_start = {});

// Unnormalized log weights of every active cluster slot for user u (whose
// statistics must already be removed from the state), followed by the
// new-cluster weight.  `slots` receives the slot index for each entry but the
// last.
std::vector<double> assignment_log_weights(const GibbsState& state, const NigEvidence<double>& evidence,
                                           const RegressionStatsd& user, std::vector<int>& slots);

void gibbs_sweep(GibbsState& state, const NigEvidence<double>& evidence,
                 const std::vector<RegressionStatsd>& users, Rng& rng);

// Auxiliary-variable update of the concentration parameter.
void sample_alpha(GibbsState& state, Rng& rng);

// log p(partition | alpha) + sum_h log p(data_h).
double log_joint(const GibbsState& state);

// Largest clusters first; beta is the posterior mean, sigma2 the posterior
// mean of the variance (rate / (shape - 1)), or rate / shape when shape <= 1.
MixtureModel extract_mixture(const GibbsState& state, const NigPriord& prior, std::size_t max_components);

// True when every active cluster's statistics equal the sum over its users.
bool statistics_consistent(const GibbsState& state, const std::vector<RegressionStatsd>& users,
                           double tolerance = 1e-8);

struct GibbsResult {
  GibbsState state;
  std::vector<int> partition;
  MixtureModel model;
  int sweeps = 0;
  std::vector<std::size_t> cluster_counts;  // after each sweep
};

GibbsResult run_gibbs(const std::vector<UserData>& data, const GibbsOptions& options, std::size_t max_components,
                      std::uint64_t seed, const std::vector<int>& warm_start = {});

struct GibbsCheckpoint {
  std::vector<int> assignments;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  int sweep = 0;

  friend bool operator==(const GibbsCheckpoint&, const GibbsCheckpoint&) = default;
};

void write_checkpoint(std::ostream& out, const GibbsCheckpoint& checkpoint);
GibbsCheckpoint read_checkpoint(std::istream& in);

}  // namespace lcb

#endif  // LCB_GIBBS_HPP_
