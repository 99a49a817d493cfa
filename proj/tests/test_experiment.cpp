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


#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lcb/experiment.hpp"

using namespace lcb;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lcb_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig tiny_sim() {
  ExperimentConfig cfg = default_sim_config();
  cfg.users = 60;
  cfg.horizons = {5};
  cfg.num_seeds = 2;
  cfg.report_every = 20;
  cfg.lcb.phase1_users = 20;
  cfg.lcb.retrain_every = 20;
  cfg.lcb.gibbs.burn_in = 5;
  cfg.lcb.gibbs.retained = 2;
  return cfg;
}

}  // namespace

TEST_CASE("algorithm names") {
  for (auto a : {AlgorithmName::lcb, AlgorithmName::lcb_gt, AlgorithmName::population_linucb,
                 AlgorithmName::individual_linucb, AlgorithmName::random}) {
    CHECK(parse_algorithm_name(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_algorithm_name("club"), std::invalid_argument);
}

TEST_CASE("config round trip and hash") {
  ExperimentConfig cfg = default_sim_config();
  cfg.lcb.retrain_every = LcbConfig::kNever;
  cfg.lcb.bandit_options.exp3_gamma = 0.2;
  cfg.horizons = {10, 30};
  const std::string text = dump_config(cfg);
  const ExperimentConfig back = parse_config(text, ExperimentConfig{});
  CHECK(dump_config(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
  CHECK(back.lcb.retrain_every == LcbConfig::kNever);
  CHECK(text.find("\"retrain_every\":\"never\"") != std::string::npos);

  ExperimentConfig other = cfg;
  other.base_seed = 2;
  CHECK(config_hash(other) != config_hash(cfg));

  // Keys that are absent keep the base values.
  const ExperimentConfig partial = parse_config(R"({"users": 7, "lcb": {"tau": 3}})", cfg);
  CHECK(partial.users == 7);
  CHECK(partial.lcb.tau == 3);
  CHECK(partial.horizons == cfg.horizons);
}

TEST_CASE("invalid configs are rejected") {
  const ExperimentConfig base;
  CHECK_THROWS_AS(parse_config("{not json", base), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"mode": "batch"})", base), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"roster": ["lcb", "club"]})", base), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"num_seeds": 0})", base), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"horizons": [0]})", base), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"users": "many"})", base), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"lcb": {"learner": "spectral"}})", base), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"mode": "offline", "roster": ["lcb_gt"]})", base), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json", base), std::runtime_error);
}

TEST_CASE("seeds are consecutive from the base seed") {
  ExperimentConfig cfg;
  cfg.base_seed = 10;
  cfg.num_seeds = 3;
  CHECK(cfg.seeds() == std::vector<std::uint64_t>{10, 11, 12});
}

TEST_CASE("identical configs write identical files") {
  ExperimentConfig cfg = tiny_sim();
  cfg.output_dir = scratch_dir("a").string();
  const std::string summary_a = run_experiment(cfg);
  cfg.output_dir = scratch_dir("b").string();
  const std::string summary_b = run_experiment(cfg);
  CHECK(summary_a == summary_b);
  for (const char* f : {"curves.csv", "summary.csv"}) {
    CHECK(slurp(scratch_dir("a").parent_path() / "lcb_test_a" / f) ==
          slurp(scratch_dir("b").parent_path() / "lcb_test_b" / f));
  }
}

TEST_CASE("every CSV row carries the config hash") {
  ExperimentConfig cfg = tiny_sim();
  const auto dir = scratch_dir("hash");
  cfg.output_dir = dir.string();
  run_experiment(cfg);
  const std::string hash = config_hash(cfg);
  for (const char* f : {"curves.csv", "summary.csv"}) {
    std::istringstream in(slurp(dir / f));
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("config_hash,", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) {
      CHECK(line.rfind(hash + ",", 0) == 0);
      ++rows;
    }
    CHECK(rows > 0);
  }
  // 5 algorithms x 2 seeds x 3 report points.
  std::istringstream curves(slurp(dir / "curves.csv"));
  int lines = 0;
  for (std::string line; std::getline(curves, line);) ++lines;
  CHECK(lines == 1 + 5 * 2 * 3);
  CHECK(std::filesystem::exists(dir / "config.json"));
  const ExperimentConfig reread = load_config((dir / "config.json").string(), ExperimentConfig{});
  CHECK(config_hash(reread) == hash);
}

TEST_CASE("random-policy regret matches a Monte-Carlo oracle") {
  ExperimentConfig cfg = default_sim_config();
  cfg.users = 1000;
  const int horizon = 20;
  const SimRun run = run_sim(cfg, AlgorithmName::random, 5, horizon);
  REQUIRE(run.outcomes.size() == 1000);
  std::vector<double> per_user;
  for (const auto& o : run.outcomes) per_user.push_back(*o.regret);
  const MeanStd observed = mean_std(per_user);
  CHECK(run.average_regret() == doctest::Approx(observed.mean).epsilon(1e-12));

  // Oracle: E[max_a beta^T x_a - mean_a beta^T x_a] over fresh contexts and
  // uniformly drawn classes.
  const PlantedModels pm = generate_models(cfg.sim);
  Rng rng(77);
  const int draws = 40000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const Context ctx = sample_context(cfg.sim, rng);
    const Vector& beta = pm.model[static_cast<std::size_t>(i % pm.model.size())].beta;
    const Vector scores = ctx.arms() * beta;
    const double gap = scores.maxCoeff() - scores.mean();
    sum += gap;
    sum_sq += gap * gap;
  }
  const double mc_mean = sum / draws;
  const double mc_var = sum_sq / draws - mc_mean * mc_mean;
  const double expected = horizon * mc_mean;
  const double se = std::sqrt(observed.std * observed.std / 1000.0 + horizon * horizon * mc_var / draws);
  CHECK(std::abs(observed.mean - expected) <= 4.0 * se);
}

TEST_CASE("lcb phase bookkeeping in simulation runs") {
  ExperimentConfig cfg = tiny_sim();
  const SimRun run = run_sim(cfg, AlgorithmName::lcb, 1, 5);
  CHECK(run.phase1_users == 20);
  CHECK(run.outcomes.size() == 60);
  CHECK(run.retrains == 2);
  CHECK(run.clip_rate >= 0.0);
  CHECK(run.clip_rate <= 1.0);
  double tail = 0.0;
  for (std::size_t i = 20; i < run.outcomes.size(); ++i) tail += *run.outcomes[i].regret;
  CHECK(run.phase2_average_regret() == doctest::Approx(tail / 40.0));
}

TEST_CASE("sample standard deviation") {
  const MeanStd ms = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == 2.5);
  CHECK(ms.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(ms.n == 4);
  CHECK(mean_std({}).n == 0);
  CHECK(mean_std({3.0}).std == 0.0);
}

TEST_CASE("offline pipeline on a small synthetic log") {
  ExperimentConfig cfg = default_offline_config();
  cfg.offline.train_users = 300;
  cfg.offline.test_users = 100;
  cfg.offline.synthetic.impressions_per_user = 60;
  cfg.lcb.gibbs.burn_in = 5;
  cfg.lcb.gibbs.retained = 2;
  const OfflineData data = prepare_offline(cfg);
  CHECK(data.train_users.size() == 300);
  CHECK(data.test_users.size() == 100);
  CHECK(data.arms.num_arms() == kNewsCategories);
  CHECK(data.arms.dim() == kProjectedDim);
  const OfflineRun a = run_offline(cfg, data, AlgorithmName::lcb, 1);
  const OfflineRun b = run_offline(cfg, data, AlgorithmName::lcb, 1);
  CHECK(a.test.clicks == b.test.clicks);
  CHECK(a.test.pulls == b.test.pulls);
  CHECK(a.test.users == 100);
  CHECK(a.train.users == 300);
  CHECK(a.log_ctr == doctest::Approx(data.ingest.log_ctr(data.test_users)));
  CHECK(a.relative_ctr() > 0.0);
}
