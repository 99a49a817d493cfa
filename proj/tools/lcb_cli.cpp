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

// Command-line front end: sim, offline, train, eval, gen-log.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lcb/experiment.hpp"

namespace {

using namespace lcb;

// Flags that override fields of the experiment configuration.
struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> seeds;
  std::optional<std::uint64_t> base_seed;
  std::vector<std::string> roster;
  std::optional<int> users;
  std::vector<int> horizons;
  std::optional<int> phase1_users;
  std::optional<std::string> retrain_every;
  std::optional<std::size_t> max_models;
  std::optional<int> tau;
  std::optional<std::string> phase1_mode;
  std::optional<std::string> learner;
  std::optional<std::string> bandit;
  std::optional<std::string> policy_kind;
  bool iid_only = false;
  std::optional<double> linucb_alpha;
  std::optional<int> burn_in;
  std::optional<int> retained;
  std::optional<int> report_every;
  // offline
  std::optional<std::string> log_path;
  std::optional<int> train_users;
  std::optional<int> test_users;
  std::optional<int> horizon;
  bool dump = false;
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config_path, "JSON configuration file");
  app.add_option("-o,--out", o.out, "output directory");
  app.add_option("--seeds", o.seeds, "number of seeds");
  app.add_option("--base-seed", o.base_seed, "first seed");
  app.add_option("--roster", o.roster, "algorithms (lcb, lcb_gt, population_linucb, individual_linucb, random)")
      ->delimiter(',');
  app.add_option("--phase1-users", o.phase1_users, "J: users served in phase 1");
  app.add_option("--retrain-every", o.retrain_every, "users between retrainings, or 'never'");
  app.add_option("--max-models", o.max_models, "cap on learned latent models");
  app.add_option("--tau", o.tau, "uniform-random steps per user");
  app.add_option("--phase1-mode", o.phase1_mode, "shared | per-user");
  app.add_option("--learner", o.learner, "gibbs | em");
  app.add_option("--bandit", o.bandit, "exp3 | exp4p | epoch_greedy | gts");
  app.add_option("--policy", o.policy_kind, "deterministic | probabilistic");
  app.add_flag("--iid-only", o.iid_only, "train only on uniform-random records");
  app.add_option("--linucb-alpha", o.linucb_alpha, "LinUCB exploration width");
  app.add_option("--burn-in", o.burn_in, "Gibbs burn-in sweeps");
  app.add_option("--retained", o.retained, "Gibbs retained sweeps");
  app.add_option("--report-every", o.report_every, "curve resolution in users");
  app.add_flag("--dump-config", o.dump, "print the effective configuration and exit");
}

ExperimentConfig resolve(const Overrides& o, ExperimentConfig cfg) {
  if (!o.config_path.empty()) cfg = load_config(o.config_path, cfg);
  if (o.out) cfg.output_dir = *o.out;
  if (o.seeds) cfg.num_seeds = *o.seeds;
  if (o.base_seed) cfg.base_seed = *o.base_seed;
  if (!o.roster.empty()) {
    cfg.roster.clear();
    for (const auto& r : o.roster) cfg.roster.push_back(parse_algorithm_name(r));
  }
  if (o.users) cfg.users = *o.users;
  if (!o.horizons.empty()) cfg.horizons = o.horizons;
  if (o.report_every) cfg.report_every = *o.report_every;
  // The LCB knobs go through the JSON codec so the same spellings apply.
  nlohmann::json lcb;
  if (o.phase1_users) lcb["phase1_users"] = *o.phase1_users;
  if (o.retrain_every) {
    if (*o.retrain_every == "never") lcb["retrain_every"] = "never";
    else {
      int users = 0;
      const std::string& v = *o.retrain_every;
      const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), users);
      if (ec != std::errc() || end != v.data() + v.size()) {
        throw std::invalid_argument("--retrain-every expects a user count or 'never', got '" + v + "'");
      }
      lcb["retrain_every"] = users;
    }
  }
  if (o.max_models) lcb["max_models"] = *o.max_models;
  if (o.tau) lcb["tau"] = *o.tau;
  if (o.phase1_mode) lcb["phase1_mode"] = *o.phase1_mode;
  if (o.learner) lcb["learner"] = *o.learner;
  if (o.bandit) lcb["bandit"] = *o.bandit;
  if (o.policy_kind) lcb["policy_kind"] = *o.policy_kind;
  if (o.iid_only) lcb["iid_only"] = true;
  if (o.linucb_alpha) lcb["linucb"]["alpha"] = *o.linucb_alpha;
  if (o.burn_in) lcb["gibbs"]["burn_in"] = *o.burn_in;
  if (o.retained) lcb["gibbs"]["retained"] = *o.retained;
  nlohmann::json off;
  if (o.log_path) off["log_path"] = *o.log_path;
  if (o.train_users) off["train_users"] = *o.train_users;
  if (o.test_users) off["test_users"] = *o.test_users;
  if (o.horizon) off["horizon"] = *o.horizon;
  nlohmann::json patch = nlohmann::json::object();
  if (!lcb.is_null()) patch["lcb"] = lcb;
  if (!off.is_null()) patch["offline"] = off;
  return parse_config(patch.dump(), cfg);
}

int run_and_report(const ExperimentConfig& cfg, bool dump) {
  if (dump) {
    std::cout << dump_config(cfg) << '\n';
    return 0;
  }
  std::cout << run_experiment(cfg, &std::cerr);
  return 0;
}

// Offline data for train/eval: the same log always yields the same arms.
ExperimentConfig offline_cfg(const Overrides& o) { return resolve(o, default_offline_config()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent contextual bandits: experiments and tools"};
  app.require_subcommand(1);

  Overrides sim_o;
  auto* sim = app.add_subcommand("sim", "synthetic-environment regret experiment");
  add_common(*sim, sim_o);
  sim->add_option("--users", sim_o.users, "users per run");
  sim->add_option("--horizons", sim_o.horizons, "T_u values, comma separated")->delimiter(',');

  Overrides off_o;
  auto* off = app.add_subcommand("offline", "queue-method evaluation on a logged-data file");
  add_common(*off, off_o);
  off->add_option("--log", off_o.log_path, "impression CSV (synthetic log when omitted)");
  off->add_option("--train-users", off_o.train_users, "users replayed before evaluation");
  off->add_option("--test-users", off_o.test_users, "users evaluated");
  off->add_option("--horizon", off_o.horizon, "steps per user");

  Overrides train_o;
  std::string model_out = "model.json";
  std::string interactions;
  std::uint64_t train_seed = 1;
  auto* train = app.add_subcommand("train", "learn latent models and save them");
  add_common(*train, train_o);
  train->add_option("--log", train_o.log_path, "impression CSV to replay (synthetic log when omitted)");
  train->add_option("--interactions", interactions, "interaction log (JSONL) to learn from directly");
  train->add_option("--train-users", train_o.train_users, "users replayed in phase 1");
  train->add_option("--horizon", train_o.horizon, "steps per user");
  train->add_option("--model", model_out, "output model file");
  train->add_option("--seed", train_seed, "learner seed");

  Overrides eval_o;
  std::string model_in;
  auto* eval = app.add_subcommand("eval", "queue-method evaluation of a saved model");
  add_common(*eval, eval_o);
  eval->add_option("--model", model_in, "model file written by train")->required();
  eval->add_option("--log", eval_o.log_path, "impression CSV (synthetic log when omitted)");
  eval->add_option("--train-users", eval_o.train_users, "users preceding the test block");
  eval->add_option("--test-users", eval_o.test_users, "users evaluated");
  eval->add_option("--horizon", eval_o.horizon, "steps per user");

  SyntheticLogSpec gen;
  std::string gen_out = "log.csv";
  std::string truth_out;
  auto* genlog = app.add_subcommand("gen-log", "write a synthetic impression log");
  genlog->add_option("--users", gen.users, "users");
  genlog->add_option("--classes", gen.classes, "planted user classes");
  genlog->add_option("--impressions", gen.impressions_per_user, "impressions per user");
  genlog->add_option("--articles", gen.articles, "distinct articles");
  genlog->add_option("--seed", gen.seed, "generator seed");
  genlog->add_option("-o,--out", gen_out, "output CSV");
  genlog->add_option("--truth", truth_out, "optional CSV of per-class category click rates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      ExperimentConfig cfg = resolve(sim_o, default_sim_config());
      cfg.mode = "sim";
      return run_and_report(cfg, sim_o.dump);
    }
    if (*off) {
      ExperimentConfig cfg = offline_cfg(off_o);
      cfg.mode = "offline";
      return run_and_report(cfg, off_o.dump);
    }
    if (*train) {
      ExperimentConfig cfg = offline_cfg(train_o);
      if (train_o.dump) return run_and_report(cfg, true);
      LcbConfig lcb = cfg.lcb;
      std::optional<LatentContextualBandit> agent;
      if (!interactions.empty()) {
        agent.emplace(lcb, train_seed);
        agent->ingest(load_log(interactions));
      } else {
        const OfflineData data = prepare_offline(cfg);
        lcb.phase1_users = static_cast<int>(data.train_users.size());
        agent.emplace(lcb, train_seed);
        QueueBank bank = data.ingest.bank;
        evaluate(bank, data.train_users, data.arms, *agent, cfg.offline.horizon);
      }
      if (!agent->retrain()) {
        for (const auto& w : agent->warnings()) std::cerr << "warning: " << w << '\n';
        std::cerr << "error: training failed\n";
        return 1;
      }
      save_model(model_out, *agent->model());
      std::cout << "saved " << agent->model()->size() << " components to " << model_out << '\n';
      return 0;
    }
    if (*eval) {
      ExperimentConfig cfg = offline_cfg(eval_o);
      if (eval_o.dump) return run_and_report(cfg, true);
      const MixtureModel model = load_model(model_in);
      const OfflineData data = prepare_offline(cfg);
      const OfflineRun run = run_offline(cfg, data, AlgorithmName::lcb, cfg.base_seed, model);
      std::cout << "config_hash,users_evaluated,clicks,pulls,ctr,log_ctr,relative_ctr,terminated_sessions\n"
                << config_hash(cfg) << ',' << run.test.users << ',' << run.test.clicks << ',' << run.test.pulls
                << ',' << run.test.ctr() << ',' << run.log_ctr << ',' << run.relative_ctr() << ','
                << run.test.terminated << '\n';
      return 0;
    }
    if (*genlog) {
      const SyntheticLog log = generate_log(gen);
      std::ofstream out(gen_out);
      if (!out) throw std::runtime_error("cannot write " + gen_out);
      write_impressions(out, log.impressions);
      if (!truth_out.empty()) {
        std::ofstream t(truth_out);
        t << "class";
        for (Eigen::Index c = 0; c < log.class_rates.cols(); ++c) t << ",cat" << c;
        t << '\n';
        for (Eigen::Index k = 0; k < log.class_rates.rows(); ++k) {
          t << k;
          for (Eigen::Index c = 0; c < log.class_rates.cols(); ++c) t << ',' << log.class_rates(k, c);
          t << '\n';
        }
      }
      std::cout << "wrote " << log.impressions.size() << " impressions to " << gen_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
