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

#ifndef LCB_EXPERIMENT_HPP_
#define LCB_EXPERIMENT_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lcb/environment.hpp"
#include "lcb/orchestrator.hpp"
#include "lcb/queue_eval.hpp"
#include "lcb/sim_env.hpp"

namespace lcb {

enum class AlgorithmName { lcb, lcb_gt, population_linucb, individual_linucb, random };

std::string to_string(AlgorithmName name);
AlgorithmName parse_algorithm_name(const std::string& name);

struct OfflineSettings {
  std::string log_path;          // empty: generate a synthetic log
  SyntheticLogSpec synthetic;    // used when log_path is empty
  int train_users = 20000;
  int test_users = 5000;
  int horizon = 20;
  int projected_dim = kProjectedDim;
};

// Experiment configuration file (JSON).  Every field is optional; defaults
// reproduce the simulation protocol (5 planted classes, d = 10, K = 20,
// sigma = 0.1, J = 50, retraining every 50 users, T_u = 20, 1000 users).
struct ExperimentConfig {
  std::string mode = "sim";  // sim | offline
  std::vector<AlgorithmName> roster = {AlgorithmName::lcb, AlgorithmName::lcb_gt,
                                       AlgorithmName::population_linucb, AlgorithmName::individual_linucb,
                                       AlgorithmName::random};
  SimSpec sim;
  int users = 1000;
  std::vector<int> horizons = {20};
  OfflineSettings offline;
  LcbConfig lcb;
  std::uint64_t base_seed = 1;
  int num_seeds = 20;
  int report_every = 50;
  std::string output_dir = "results";

  void validate() const;
  std::vector<std::uint64_t> seeds() const;
};

// Sim-mode defaults with learner settings sized for repeated retraining:
// the sampler is warm-started from the previous partition, so fewer sweeps
// are needed than for a cold start.
ExperimentConfig default_sim_config();
// Offline defaults: J = all training users, a single batch training, N = 10.
ExperimentConfig default_offline_config();

ExperimentConfig parse_config(const std::string& json_text, const ExperimentConfig& base);
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base);
// Canonical JSON (sorted keys) of every field.
std::string dump_config(const ExperimentConfig& cfg);
// FNV-1a 64-bit hash of the canonical JSON without output_dir, as 16 hex
// digits.
std::string config_hash(const ExperimentConfig& cfg);

std::unique_ptr<InteractiveAlgorithm> make_algorithm(AlgorithmName name, const LcbConfig& lcb,
                                                     const std::optional<MixtureModel>& planted,
                                                     std::uint64_t seed);

struct SimRun {
  AlgorithmName algorithm = AlgorithmName::lcb;
  std::uint64_t seed = 0;
  int horizon = 0;
  std::vector<UserOutcome> outcomes;
  int phase1_users = 0;  // leading outcomes served in phase 1 (LCB only)
  double clip_rate = 0.0;
  int retrains = 0;

  // Cumulative regret over the first n users divided by n.
  double average_regret(std::size_t first_n) const;
  double average_regret() const { return average_regret(outcomes.size()); }
  double phase2_average_regret() const;
};

SimRun run_sim(const ExperimentConfig& cfg, AlgorithmName algo, std::uint64_t seed, int horizon);

struct OfflineData {
  IngestResult ingest;
  ArmProjection projection;
  Context arms;
  std::vector<int> train_users;
  std::vector<int> test_users;
};

OfflineData prepare_offline(const ExperimentConfig& cfg);

struct OfflineRun {
  AlgorithmName algorithm = AlgorithmName::lcb;
  std::uint64_t seed = 0;
  QueueEvalResult train;
  QueueEvalResult test;
  double log_ctr = 0.0;

  double relative_ctr() const { return log_ctr > 0.0 ? test.ctr() / log_ctr : 0.0; }
};

// Pre-trains on the training users through the queue replay, then evaluates
// on the test users.  `model` (optional) skips learning for LCB.
OfflineRun run_offline(const ExperimentConfig& cfg, const OfflineData& data, AlgorithmName algo, std::uint64_t seed,
                       const std::optional<MixtureModel>& model = std::nullopt);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  int n = 0;
};
MeanStd mean_std(const std::vector<double>& values);

// Runs every algorithm x seed (x horizon in sim mode) and writes
// `<output_dir>/curves.csv` and `<output_dir>/summary.csv`.  Returns the
// summary rows as CSV text.
std::string run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

}  // namespace lcb

#endif  // LCB_EXPERIMENT_HPP_
