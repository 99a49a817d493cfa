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

#include "lcb/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace lcb {

using nlohmann::json;

std::size_t GibbsState::num_clusters() const {
  return static_cast<std::size_t>(
      std::count_if(clusters.begin(), clusters.end(), [](const GibbsCluster& c) { return c.users > 0; }));
}

std::vector<int> GibbsState::canonical_partition() const {
  std::unordered_map<int, int> relabel;
  std::vector<int> out(assignments.size());
  for (std::size_t u = 0; u < assignments.size(); ++u) {
    auto [it, inserted] = relabel.try_emplace(assignments[u], static_cast<int>(relabel.size()));
    out[u] = it->second;
  }
  return out;
}

std::vector<RegressionStatsd> user_statistics(const std::vector<UserData>& data) {
  std::vector<RegressionStatsd> out;
  out.reserve(data.size());
  for (const auto& u : data) out.push_back(RegressionStatsd::from(u.features, u.rewards));
  return out;
}

namespace {

int open_slot(GibbsState& state, Eigen::Index dim) {
  if (!state.free_slots.empty()) {
    const int slot = state.free_slots.back();
    state.free_slots.pop_back();
    return slot;
  }
  state.clusters.push_back(GibbsCluster{RegressionStatsd::zero(dim), 0, 0.0});
  return static_cast<int>(state.clusters.size()) - 1;
}

void remove_user(GibbsState& state, const NigEvidence<double>& evidence, const RegressionStatsd& user, int slot) {
  GibbsCluster& c = state.clusters[static_cast<std::size_t>(slot)];
  c.users -= 1;
  if (c.users == 0) {
    c.stats = RegressionStatsd::zero(user.dim());
    c.log_marginal = 0.0;
    state.free_slots.push_back(slot);
  } else {
    c.stats -= user;
    c.log_marginal = evidence.log_marginal(c.stats);
  }
}

void add_user(GibbsState& state, const RegressionStatsd& user, int slot, double joint_log_marginal) {
  GibbsCluster& c = state.clusters[static_cast<std::size_t>(slot)];
  if (c.users == 0) {
    c.stats = user;
  } else {
    c.stats += user;
  }
  c.users += 1;
  c.log_marginal = joint_log_marginal;
}

// Fills log weights (existing slots then new cluster) and the joint log
// marginal each choice would produce.
void weights_for(const GibbsState& state, const NigEvidence<double>& evidence, const RegressionStatsd& user,
                 RegressionStatsd& scratch, std::vector<int>& slots, std::vector<double>& log_weights,
                 std::vector<double>& joint) {
  slots.clear();
  log_weights.clear();
  joint.clear();
  for (std::size_t h = 0; h < state.clusters.size(); ++h) {
    const GibbsCluster& c = state.clusters[h];
    if (c.users == 0) continue;
    scratch.xtx = c.stats.xtx + user.xtx;
    scratch.xtr = c.stats.xtr + user.xtr;
    scratch.rtr = c.stats.rtr + user.rtr;
    scratch.count = c.stats.count + user.count;
    const double lm = evidence.log_marginal(scratch);
    slots.push_back(static_cast<int>(h));
    joint.push_back(lm);
    log_weights.push_back(std::log(static_cast<double>(c.users)) + lm - c.log_marginal);
  }
  const double lm_new = evidence.log_marginal(user);
  joint.push_back(lm_new);
  log_weights.push_back(std::log(state.alpha) + lm_new);
}

}  // namespace

GibbsState make_state(const NigEvidence<double>& evidence, const std::vector<RegressionStatsd>& users,
                      const std::vector<int>& labels, double alpha, double alpha_shape, double alpha_rate) {
  if (labels.size() != users.size()) throw std::invalid_argument("make_state: label count mismatch");
  if (!(alpha > 0.0)) throw std::invalid_argument("make_state: alpha must be positive");
  GibbsState state;
  state.alpha = alpha;
  state.alpha_shape = alpha_shape;
  state.alpha_rate = alpha_rate;
  state.assignments.assign(users.size(), -1);
  const Eigen::Index d = evidence.prior().dim();
  std::unordered_map<int, int> slot_of;
  for (std::size_t u = 0; u < users.size(); ++u) {
    if (labels[u] < 0) throw std::invalid_argument("make_state: negative label");
    auto it = slot_of.find(labels[u]);
    if (it == slot_of.end()) it = slot_of.emplace(labels[u], open_slot(state, d)).first;
    GibbsCluster& c = state.clusters[static_cast<std::size_t>(it->second)];
    c.stats += users[u];
    c.users += 1;
    state.assignments[u] = it->second;
  }
  for (auto& c : state.clusters) c.log_marginal = evidence.log_marginal(c.stats);
  return state;
}

GibbsState initialize_gibbs(const NigEvidence<double>& evidence, const std::vector<RegressionStatsd>& users,
                            double alpha, double alpha_shape, double alpha_rate, Rng& rng,
                            const std::vector<int>& warm_start) {
  if (!(alpha > 0.0)) throw std::invalid_argument("initialize_gibbs: alpha must be positive");
  GibbsState state;
  state.alpha = alpha;
  state.alpha_shape = alpha_shape;
  state.alpha_rate = alpha_rate;
  state.assignments.assign(users.size(), -1);
  const Eigen::Index d = evidence.prior().dim();

  std::unordered_map<int, int> slot_of;
  for (std::size_t u = 0; u < users.size() && u < warm_start.size(); ++u) {
    if (warm_start[u] < 0) continue;
    auto it = slot_of.find(warm_start[u]);
    if (it == slot_of.end()) it = slot_of.emplace(warm_start[u], open_slot(state, d)).first;
    GibbsCluster& c = state.clusters[static_cast<std::size_t>(it->second)];
    c.stats += users[u];
    c.users += 1;
    state.assignments[u] = it->second;
  }
  for (auto& c : state.clusters) c.log_marginal = evidence.log_marginal(c.stats);

  RegressionStatsd scratch = RegressionStatsd::zero(d);
  std::vector<int> slots;
  std::vector<double> log_weights;
  std::vector<double> joint;
  for (std::size_t u = 0; u < users.size(); ++u) {
    if (state.assignments[u] >= 0) continue;
    weights_for(state, evidence, users[u], scratch, slots, log_weights, joint);
    const std::size_t pick = sample_log_categorical(rng, log_weights);
    const int slot = pick < slots.size() ? slots[pick] : open_slot(state, d);
    add_user(state, users[u], slot, joint[pick]);
    state.assignments[u] = slot;
  }
  return state;
}

std::vector<double> assignment_log_weights(const GibbsState& state, const NigEvidence<double>& evidence,
                                           const RegressionStatsd& user, std::vector<int>& slots) {
  RegressionStatsd scratch = RegressionStatsd::zero(user.dim());
  std::vector<double> log_weights;
  std::vector<double> joint;
  weights_for(state, evidence, user, scratch, slots, log_weights, joint);
  return log_weights;
}

void gibbs_sweep(GibbsState& state, const NigEvidence<double>& evidence,
                 const std::vector<RegressionStatsd>& users, Rng& rng) {
  if (users.size() != state.assignments.size()) throw std::invalid_argument("gibbs_sweep: state/data mismatch");
  if (users.empty()) return;
  const Eigen::Index d = evidence.prior().dim();
  RegressionStatsd scratch = RegressionStatsd::zero(d);
  std::vector<int> slots;
  std::vector<double> log_weights;
  std::vector<double> joint;
  for (std::size_t u = 0; u < users.size(); ++u) {
    remove_user(state, evidence, users[u], state.assignments[u]);
    weights_for(state, evidence, users[u], scratch, slots, log_weights, joint);
    const std::size_t pick = sample_log_categorical(rng, log_weights);
    const int slot = pick < slots.size() ? slots[pick] : open_slot(state, d);
    add_user(state, users[u], slot, joint[pick]);
    state.assignments[u] = slot;
  }
}

void sample_alpha(GibbsState& state, Rng& rng) {
  const std::size_t k = state.num_clusters();
  if (k == 0) throw std::invalid_argument("sample_alpha: no clusters");
  const double n = static_cast<double>(state.num_users());
  const double eta = std::max(sample_beta(rng, state.alpha + 1.0, n), std::numeric_limits<double>::min());
  const double rate = state.alpha_rate - std::log(eta);
  const double kk = static_cast<double>(k);
  const double odds = (state.alpha_shape + kk - 1.0) / (n * rate);
  const double mix = odds / (1.0 + odds);
  const double shape = sample_uniform(rng) < mix ? state.alpha_shape + kk : state.alpha_shape + kk - 1.0;
  double alpha = shape > 0.0 ? sample_gamma(rng, shape, rate) : 0.0;
  if (!(alpha > 0.0) || !std::isfinite(alpha)) alpha = std::numeric_limits<double>::min();
  state.alpha = alpha;
}

double log_joint(const GibbsState& state) {
  const double n = static_cast<double>(state.num_users());
  double lp = std::lgamma(state.alpha) - std::lgamma(state.alpha + n);
  for (const auto& c : state.clusters) {
    if (c.users == 0) continue;
    lp += std::log(state.alpha) + std::lgamma(static_cast<double>(c.users)) + c.log_marginal;
  }
  return lp;
}

MixtureModel extract_mixture(const GibbsState& state, const NigPriord& prior, std::size_t max_components) {
  if (max_components < 1) throw std::invalid_argument("extract_mixture: max_components must be positive");
  // Active slots in order of first appearance, so ties in size are broken
  // deterministically.
  std::vector<int> active;
  std::vector<char> seen(state.clusters.size(), 0);
  for (const int slot : state.assignments) {
    if (!seen[static_cast<std::size_t>(slot)]) {
      seen[static_cast<std::size_t>(slot)] = 1;
      active.push_back(slot);
    }
  }
  if (active.empty()) throw std::invalid_argument("extract_mixture: empty state");
  std::stable_sort(active.begin(), active.end(), [&](int a, int b) {
    return state.clusters[static_cast<std::size_t>(a)].users > state.clusters[static_cast<std::size_t>(b)].users;
  });
  if (active.size() > max_components) active.resize(max_components);
  double kept = 0.0;
  for (int slot : active) kept += state.clusters[static_cast<std::size_t>(slot)].users;
  std::vector<MixtureComponent> comps;
  for (int slot : active) {
    const GibbsCluster& c = state.clusters[static_cast<std::size_t>(slot)];
    const NigPriord post = nig_posterior(prior, c.stats);
    const double sigma2 = post.shape > 1.0 ? post.rate / (post.shape - 1.0) : post.rate / post.shape;
    comps.push_back(MixtureComponent{c.users / kept, post.mean, sigma2});
  }
  // Re-normalize exactly against round-off.
  double total = 0.0;
  for (const auto& c : comps) total += c.pi;
  for (auto& c : comps) c.pi /= total;
  return MixtureModel(std::move(comps));
}

bool statistics_consistent(const GibbsState& state, const std::vector<RegressionStatsd>& users, double tolerance) {
  if (users.size() != state.assignments.size()) return false;
  if (users.empty()) return state.num_clusters() == 0;
  const Eigen::Index d = users.front().dim();
  std::vector<RegressionStatsd> sums(state.clusters.size(), RegressionStatsd::zero(d));
  std::vector<int> counts(state.clusters.size(), 0);
  for (std::size_t u = 0; u < users.size(); ++u) {
    const int slot = state.assignments[u];
    if (slot < 0 || static_cast<std::size_t>(slot) >= state.clusters.size()) return false;
    sums[static_cast<std::size_t>(slot)] += users[u];
    counts[static_cast<std::size_t>(slot)] += 1;
  }
  for (std::size_t h = 0; h < state.clusters.size(); ++h) {
    const GibbsCluster& c = state.clusters[h];
    if (c.users != counts[h]) return false;
    if (c.users == 0) continue;
    const double scale = 1.0 + sums[h].xtx.cwiseAbs().maxCoeff() + std::abs(sums[h].rtr);
    if ((c.stats.xtx - sums[h].xtx).cwiseAbs().maxCoeff() > tolerance * scale) return false;
    if ((c.stats.xtr - sums[h].xtr).cwiseAbs().maxCoeff() > tolerance * scale) return false;
    if (std::abs(c.stats.rtr - sums[h].rtr) > tolerance * scale) return false;
    if (c.stats.count != sums[h].count) return false;
  }
  return true;
}

NigPriord base_measure(const GibbsOptions& options, Eigen::Index d) {
  if (options.prior) return *options.prior;
  NigPriord prior = NigPriord::standard(d);
  prior.scale *= options.prior_scale;
  prior.shape = options.prior_shape;
  prior.rate = options.prior_rate;
  prior.validate();
  return prior;
}

GibbsResult run_gibbs(const std::vector<UserData>& data, const GibbsOptions& options, std::size_t max_components,
                      std::uint64_t seed, const std::vector<int>& warm_start) {
  if (data.empty()) throw std::invalid_argument("run_gibbs: no training users");
  const Eigen::Index d = data.front().features.cols();
  const NigPriord prior = base_measure(options, d);
  if (prior.dim() != d) throw std::invalid_argument("run_gibbs: prior dimension mismatch");
  const NigEvidence<double> evidence(prior);
  const auto users = user_statistics(data);
  Rng rng(seed);

  GibbsResult result;
  result.state = initialize_gibbs(evidence, users, options.alpha, options.alpha_shape, options.alpha_rate, rng,
                                  warm_start);
  const int total = std::max(0, options.burn_in) + std::max(0, options.retained);
  double best_score = -std::numeric_limits<double>::infinity();
  GibbsState best = result.state;
  for (int sweep = 0; sweep < total; ++sweep) {
    gibbs_sweep(result.state, evidence, users, rng);
    if (options.resample_alpha) sample_alpha(result.state, rng);
    result.cluster_counts.push_back(result.state.num_clusters());
    if (options.summary == PartitionSummary::map_over_sweeps && sweep >= options.burn_in) {
      const double score = log_joint(result.state);
      if (score > best_score) {
        best_score = score;
        best = result.state;
      }
    }
  }
  result.sweeps = total;
  if (options.summary == PartitionSummary::map_over_sweeps && std::isfinite(best_score)) {
    result.state = std::move(best);
  }
  result.partition = result.state.canonical_partition();
  result.model = extract_mixture(result.state, prior, max_components);
  return result;
}

void write_checkpoint(std::ostream& out, const GibbsCheckpoint& checkpoint) {
  out << json{{"format", "lcb-gibbs-checkpoint"},
              {"assignments", checkpoint.assignments},
              {"alpha", checkpoint.alpha},
              {"seed", checkpoint.seed},
              {"sweep", checkpoint.sweep}}
             .dump()
      << '\n';
}

GibbsCheckpoint read_checkpoint(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != "lcb-gibbs-checkpoint") throw ParseError("checkpoint: unknown format");
    return GibbsCheckpoint{j.at("assignments").get<std::vector<int>>(), j.at("alpha").get<double>(),
                           j.at("seed").get<std::uint64_t>(), j.at("sweep").get<int>()};
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace lcb
