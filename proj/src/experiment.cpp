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

#include "lcb/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "lcb/baselines.hpp"

namespace lcb {

using nlohmann::json;

std::string to_string(AlgorithmName name) {
  switch (name) {
    case AlgorithmName::lcb: return "lcb";
    case AlgorithmName::lcb_gt: return "lcb_gt";
    case AlgorithmName::population_linucb: return "population_linucb";
    case AlgorithmName::individual_linucb: return "individual_linucb";
    case AlgorithmName::random: return "random";
  }
  return "unknown";
}

AlgorithmName parse_algorithm_name(const std::string& name) {
  for (auto a : {AlgorithmName::lcb, AlgorithmName::lcb_gt, AlgorithmName::population_linucb,
                 AlgorithmName::individual_linucb, AlgorithmName::random}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

void ExperimentConfig::validate() const {
  if (mode != "sim" && mode != "offline") throw std::invalid_argument("config: mode must be sim or offline");
  if (roster.empty()) throw std::invalid_argument("config: roster must not be empty");
  if (num_seeds < 1) throw std::invalid_argument("config: num_seeds must be >= 1");
  if (users < 0) throw std::invalid_argument("config: users must be >= 0");
  if (horizons.empty()) throw std::invalid_argument("config: horizons must not be empty");
  for (int h : horizons) {
    if (h < 1) throw std::invalid_argument("config: horizons must be positive");
  }
  if (report_every < 1) throw std::invalid_argument("config: report_every must be >= 1");
  sim.validate();
  lcb.validate();
  if (mode == "offline") {
    if (offline.train_users < 0 || offline.test_users < 1 || offline.horizon < 1) {
      throw std::invalid_argument("config: bad offline sizes");
    }
    for (auto a : roster) {
      if (a == AlgorithmName::lcb_gt) throw std::invalid_argument("config: lcb_gt needs planted models (sim mode only)");
    }
  }
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < num_seeds; ++i) out.push_back(base_seed + static_cast<std::uint64_t>(i));
  return out;
}

ExperimentConfig default_sim_config() {
  ExperimentConfig cfg;
  cfg.lcb.gibbs.burn_in = 20;
  cfg.lcb.gibbs.retained = 5;
  // Noise prior and GTS rate matched to the planted noise level.
  const double var = cfg.sim.noise_sigma * cfg.sim.noise_sigma;
  cfg.lcb.gibbs.prior_rate = var;
  cfg.lcb.bandit_options.gts_eta = 1.0 / (2.0 * var);
  return cfg;
}

ExperimentConfig default_offline_config() {
  ExperimentConfig cfg;
  cfg.mode = "offline";
  cfg.roster = {AlgorithmName::lcb, AlgorithmName::population_linucb, AlgorithmName::individual_linucb,
                AlgorithmName::random};
  cfg.num_seeds = 1;
  cfg.report_every = 1000;
  cfg.lcb.retrain_every = LcbConfig::kNever;
  cfg.lcb.max_models = 10;
  cfg.lcb.phase1_mode = Phase1Mode::per_user;
  cfg.lcb.gibbs.burn_in = 30;
  cfg.lcb.gibbs.retained = 10;
  // Click rewards: noise variance p (1 - p) is about 0.15 at typical rates.
  cfg.lcb.gibbs.prior_rate = 0.05;
  cfg.lcb.bandit_options.gts_eta = 3.0;
  return cfg;
}

// -- JSON codec ---------------------------------------------------------------

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

json lcb_to_json(const LcbConfig& c) {
  json bo{{"delta", c.bandit_options.delta}, {"gts_eta", c.bandit_options.gts_eta}};
  bo["exp3_gamma"] = c.bandit_options.exp3_gamma ? json(*c.bandit_options.exp3_gamma) : json(nullptr);
  bo["p_min"] = c.bandit_options.p_min ? json(*c.bandit_options.p_min) : json(nullptr);
  return json{
      {"phase1_users", c.phase1_users},
      {"max_models", c.max_models},
      {"retrain_every", c.retrain_every == LcbConfig::kNever ? json("never") : json(c.retrain_every)},
      {"tau", c.tau},
      {"phase1_mode", to_string(c.phase1_mode)},
      {"learner", to_string(c.learner)},
      {"policy_kind", c.policy_kind == PolicyKind::deterministic ? "deterministic" : "probabilistic"},
      {"temperature", c.temperature},
      {"bandit", to_string(c.bandit)},
      {"bandit_options", bo},
      {"iid_only", c.iid_only},
      {"warm_start", c.warm_start},
      {"linucb", {{"alpha", c.linucb.alpha}, {"ridge", c.linucb.ridge}, {"refactor_every", c.linucb.refactor_every}}},
      {"gibbs",
       {{"alpha", c.gibbs.alpha},
        {"alpha_shape", c.gibbs.alpha_shape},
        {"alpha_rate", c.gibbs.alpha_rate},
        {"resample_alpha", c.gibbs.resample_alpha},
        {"prior_scale", c.gibbs.prior_scale},
        {"prior_shape", c.gibbs.prior_shape},
        {"prior_rate", c.gibbs.prior_rate},
        {"burn_in", c.gibbs.burn_in},
        {"retained", c.gibbs.retained},
        {"summary", c.gibbs.summary == PartitionSummary::last_sweep ? "last" : "map"}}},
      {"em", {{"iterations", c.em.iterations}, {"ridge", c.em.ridge}}},
  };
}

void lcb_from_json(const json& j, LcbConfig& c) {
  read_opt(j, "phase1_users", c.phase1_users);
  read_opt(j, "max_models", c.max_models);
  if (j.contains("retrain_every")) {
    const json& r = j.at("retrain_every");
    if (r.is_null() || (r.is_string() && r.get<std::string>() == "never")) {
      c.retrain_every = LcbConfig::kNever;
    } else {
      c.retrain_every = r.get<int>();
    }
  }
  read_opt(j, "tau", c.tau);
  if (j.contains("phase1_mode")) {
    const auto m = j.at("phase1_mode").get<std::string>();
    if (m == "shared") c.phase1_mode = Phase1Mode::shared;
    else if (m == "per-user" || m == "per_user") c.phase1_mode = Phase1Mode::per_user;
    else throw std::invalid_argument("config: unknown phase1_mode " + m);
  }
  if (j.contains("learner")) {
    const auto l = j.at("learner").get<std::string>();
    if (l == "gibbs") c.learner = Learner::gibbs;
    else if (l == "em") c.learner = Learner::em;
    else throw std::invalid_argument("config: unknown learner " + l);
  }
  if (j.contains("policy_kind")) {
    const auto k = j.at("policy_kind").get<std::string>();
    if (k == "deterministic") c.policy_kind = PolicyKind::deterministic;
    else if (k == "probabilistic") c.policy_kind = PolicyKind::probabilistic;
    else throw std::invalid_argument("config: unknown policy_kind " + k);
  }
  read_opt(j, "temperature", c.temperature);
  if (j.contains("bandit")) c.bandit = parse_bandit_algorithm(j.at("bandit").get<std::string>());
  if (j.contains("bandit_options")) {
    const json& b = j.at("bandit_options");
    read_opt(b, "delta", c.bandit_options.delta);
    read_opt(b, "gts_eta", c.bandit_options.gts_eta);
    if (b.contains("exp3_gamma")) {
      c.bandit_options.exp3_gamma = b.at("exp3_gamma").is_null() ? std::nullopt
                                                                  : std::optional<double>(b.at("exp3_gamma").get<double>());
    }
    if (b.contains("p_min")) {
      c.bandit_options.p_min = b.at("p_min").is_null() ? std::nullopt : std::optional<double>(b.at("p_min").get<double>());
    }
  }
  read_opt(j, "iid_only", c.iid_only);
  read_opt(j, "warm_start", c.warm_start);
  if (j.contains("linucb")) {
    read_opt(j.at("linucb"), "alpha", c.linucb.alpha);
    read_opt(j.at("linucb"), "ridge", c.linucb.ridge);
    read_opt(j.at("linucb"), "refactor_every", c.linucb.refactor_every);
  }
  if (j.contains("gibbs")) {
    const json& g = j.at("gibbs");
    read_opt(g, "alpha", c.gibbs.alpha);
    read_opt(g, "alpha_shape", c.gibbs.alpha_shape);
    read_opt(g, "alpha_rate", c.gibbs.alpha_rate);
    read_opt(g, "resample_alpha", c.gibbs.resample_alpha);
    read_opt(g, "prior_scale", c.gibbs.prior_scale);
    read_opt(g, "prior_shape", c.gibbs.prior_shape);
    read_opt(g, "prior_rate", c.gibbs.prior_rate);
    read_opt(g, "burn_in", c.gibbs.burn_in);
    read_opt(g, "retained", c.gibbs.retained);
    if (g.contains("summary")) {
      const auto s = g.at("summary").get<std::string>();
      if (s == "last") c.gibbs.summary = PartitionSummary::last_sweep;
      else if (s == "map") c.gibbs.summary = PartitionSummary::map_over_sweeps;
      else throw std::invalid_argument("config: unknown gibbs summary " + s);
    }
  }
  if (j.contains("em")) {
    read_opt(j.at("em"), "iterations", c.em.iterations);
    read_opt(j.at("em"), "ridge", c.em.ridge);
  }
}

json synthetic_to_json(const SyntheticLogSpec& s) {
  return json{{"users", s.users},
              {"classes", s.classes},
              {"categories", s.categories},
              {"major_categories", s.major_categories},
              {"impressions_per_user", s.impressions_per_user},
              {"articles", s.articles},
              {"major_popularity", s.major_popularity},
              {"multi_category_prob", s.multi_category_prob},
              {"high_rate", s.high_rate},
              {"low_rate", s.low_rate},
              {"first_user_id", s.first_user_id},
              {"seed", s.seed}};
}

void synthetic_from_json(const json& j, SyntheticLogSpec& s) {
  read_opt(j, "users", s.users);
  read_opt(j, "classes", s.classes);
  read_opt(j, "categories", s.categories);
  read_opt(j, "major_categories", s.major_categories);
  read_opt(j, "impressions_per_user", s.impressions_per_user);
  read_opt(j, "articles", s.articles);
  read_opt(j, "major_popularity", s.major_popularity);
  read_opt(j, "multi_category_prob", s.multi_category_prob);
  read_opt(j, "high_rate", s.high_rate);
  read_opt(j, "low_rate", s.low_rate);
  read_opt(j, "first_user_id", s.first_user_id);
  read_opt(j, "seed", s.seed);
}

json config_to_json(const ExperimentConfig& c) {
  json roster = json::array();
  for (auto a : c.roster) roster.push_back(to_string(a));
  return json{
      {"mode", c.mode},
      {"roster", roster},
      {"sim",
       {{"n_true", c.sim.n_true},
        {"dim", c.sim.dim},
        {"arms", c.sim.arms},
        {"noise_sigma", c.sim.noise_sigma},
        {"class_weights", c.sim.class_weights},
        {"model_seed", c.sim.model_seed},
        {"clip_rewards", c.sim.clip_rewards}}},
      {"users", c.users},
      {"horizons", c.horizons},
      {"offline",
       {{"log_path", c.offline.log_path},
        {"synthetic", synthetic_to_json(c.offline.synthetic)},
        {"train_users", c.offline.train_users},
        {"test_users", c.offline.test_users},
        {"horizon", c.offline.horizon},
        {"projected_dim", c.offline.projected_dim}}},
      {"lcb", lcb_to_json(c.lcb)},
      {"base_seed", c.base_seed},
      {"num_seeds", c.num_seeds},
      {"report_every", c.report_every},
      {"output_dir", c.output_dir},
  };
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const ExperimentConfig& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  ExperimentConfig c = base;
  try {
    read_opt(j, "mode", c.mode);
    if (j.contains("roster")) {
      c.roster.clear();
      for (const auto& a : j.at("roster")) c.roster.push_back(parse_algorithm_name(a.get<std::string>()));
    }
    if (j.contains("sim")) {
      const json& s = j.at("sim");
      read_opt(s, "n_true", c.sim.n_true);
      read_opt(s, "dim", c.sim.dim);
      read_opt(s, "arms", c.sim.arms);
      read_opt(s, "noise_sigma", c.sim.noise_sigma);
      read_opt(s, "class_weights", c.sim.class_weights);
      read_opt(s, "model_seed", c.sim.model_seed);
      read_opt(s, "clip_rewards", c.sim.clip_rewards);
    }
    read_opt(j, "users", c.users);
    read_opt(j, "horizons", c.horizons);
    if (j.contains("offline")) {
      const json& o = j.at("offline");
      read_opt(o, "log_path", c.offline.log_path);
      if (o.contains("synthetic")) synthetic_from_json(o.at("synthetic"), c.offline.synthetic);
      read_opt(o, "train_users", c.offline.train_users);
      read_opt(o, "test_users", c.offline.test_users);
      read_opt(o, "horizon", c.offline.horizon);
      read_opt(o, "projected_dim", c.offline.projected_dim);
    }
    if (j.contains("lcb")) lcb_from_json(j.at("lcb"), c.lcb);
    read_opt(j, "base_seed", c.base_seed);
    read_opt(j, "num_seeds", c.num_seeds);
    read_opt(j, "report_every", c.report_every);
    read_opt(j, "output_dir", c.output_dir);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, base);
}

std::string dump_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("output_dir");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

// -- Runs ---------------------------------------------------------------------

std::unique_ptr<InteractiveAlgorithm> make_algorithm(AlgorithmName name, const LcbConfig& lcb,
                                                     const std::optional<MixtureModel>& planted,
                                                     std::uint64_t seed) {
  switch (name) {
    case AlgorithmName::lcb:
      if (planted) return std::make_unique<LatentContextualBandit>(lcb, *planted, seed);
      return std::make_unique<LatentContextualBandit>(lcb, seed);
    case AlgorithmName::lcb_gt:
      if (!planted) throw std::invalid_argument("lcb_gt needs the planted model");
      return std::make_unique<LatentContextualBandit>(lcb, *planted, seed);
    case AlgorithmName::population_linucb: return std::make_unique<PopulationLinUcb>(lcb.linucb);
    case AlgorithmName::individual_linucb: return std::make_unique<IndividualLinUcb>(lcb.linucb);
    case AlgorithmName::random: return std::make_unique<UniformRandom>(derive_seed(seed, 99));
  }
  throw std::invalid_argument("unknown algorithm");
}

double SimRun::average_regret(std::size_t first_n) const {
  first_n = std::min(first_n, outcomes.size());
  if (first_n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < first_n; ++i) total += outcomes[i].regret.value_or(0.0);
  return total / static_cast<double>(first_n);
}

double SimRun::phase2_average_regret() const {
  const auto start = static_cast<std::size_t>(std::min<int>(phase1_users, static_cast<int>(outcomes.size())));
  if (start >= outcomes.size()) return 0.0;
  double total = 0.0;
  for (std::size_t i = start; i < outcomes.size(); ++i) total += outcomes[i].regret.value_or(0.0);
  return total / static_cast<double>(outcomes.size() - start);
}

SimRun run_sim(const ExperimentConfig& cfg, AlgorithmName algo, std::uint64_t seed, int horizon) {
  SimSpec spec = cfg.sim;
  spec.horizon_min = spec.horizon_max = horizon;
  const PlantedModels planted = generate_models(spec);
  SimEnvironment env(spec, planted.model, derive_seed(seed, 1), cfg.users);

  LcbConfig lcb = cfg.lcb;
  std::optional<MixtureModel> fixed;
  if (algo == AlgorithmName::lcb_gt) fixed = planted.model;
  auto agent = make_algorithm(algo, lcb, fixed, derive_seed(seed, 2));

  SimRun run;
  run.algorithm = algo;
  run.seed = seed;
  run.horizon = horizon;
  if (algo == AlgorithmName::lcb) run.phase1_users = std::min(lcb.phase1_users, cfg.users);
  while (auto session = env.next_user()) run.outcomes.push_back(run_user(*agent, *session));
  run.clip_rate = env.clip_counter().rate();
  if (auto* l = dynamic_cast<LatentContextualBandit*>(agent.get())) run.retrains = l->retrain_count();
  return run;
}

OfflineData prepare_offline(const ExperimentConfig& cfg) {
  const auto& o = cfg.offline;
  IngestResult ingest = [&] {
    if (!o.log_path.empty()) {
      std::ifstream in(o.log_path);
      if (!in) throw std::runtime_error("cannot open log " + o.log_path);
      return ingest_log(in, o.synthetic.categories);
    }
    SyntheticLogSpec spec = o.synthetic;
    spec.users = o.train_users + o.test_users;
    return ingest_impressions(generate_log(spec).impressions, spec.categories);
  }();
  const std::vector<int>& users = ingest.bank.users();
  if (static_cast<int>(users.size()) < o.train_users + 1) throw std::runtime_error("offline: not enough users in log");
  const auto train_end = static_cast<std::size_t>(o.train_users);
  const auto test_end = std::min(users.size(), train_end + static_cast<std::size_t>(o.test_users));
  std::vector<int> train(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(train_end));
  std::vector<int> test(users.begin() + static_cast<std::ptrdiff_t>(train_end),
                        users.begin() + static_cast<std::ptrdiff_t>(test_end));
  ArmProjection projection = pca_fit(ingest.article_vectors(), o.projected_dim);
  Context arms = category_context(projection, ingest.bank.num_categories());
  return OfflineData{std::move(ingest), std::move(projection), std::move(arms), std::move(train), std::move(test)};
}

OfflineRun run_offline(const ExperimentConfig& cfg, const OfflineData& data, AlgorithmName algo, std::uint64_t seed,
                       const std::optional<MixtureModel>& model) {
  LcbConfig lcb = cfg.lcb;
  lcb.phase1_users = static_cast<int>(data.train_users.size());
  auto agent = make_algorithm(algo, lcb, model, derive_seed(seed, 2));
  QueueBank bank = data.ingest.bank;
  OfflineRun run;
  run.algorithm = algo;
  run.seed = seed;
  if (!model) run.train = evaluate(bank, data.train_users, data.arms, *agent, cfg.offline.horizon);
  run.test = evaluate(bank, data.test_users, data.arms, *agent, cfg.offline.horizon, cfg.report_every);
  run.log_ctr = data.ingest.log_ctr(data.test_users);
  return run;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  out.n = static_cast<int>(values.size());
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= out.n;
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (out.n - 1));
  }
  return out;
}

std::string run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  std::ostringstream curves;
  std::ostringstream summary;
  curves << std::setprecision(10);
  summary << std::setprecision(10);

  if (cfg.mode == "sim") {
    curves << "config_hash,algorithm,seed,horizon,users,avg_regret_per_user\n";
    summary << "config_hash,algorithm,horizon,users,mean_regret_per_user,std_regret_per_user,seeds\n";
    for (int horizon : cfg.horizons) {
      for (auto algo : cfg.roster) {
        std::vector<double> finals;
        for (auto seed : cfg.seeds()) {
          const SimRun run = run_sim(cfg, algo, seed, horizon);
          for (std::size_t n = static_cast<std::size_t>(cfg.report_every); n <= run.outcomes.size();
               n += static_cast<std::size_t>(cfg.report_every)) {
            curves << hash << ',' << to_string(algo) << ',' << seed << ',' << horizon << ',' << n << ','
                   << run.average_regret(n) << '\n';
          }
          finals.push_back(run.average_regret());
          if (progress) {
            *progress << to_string(algo) << " T_u=" << horizon << " seed=" << seed
                      << " regret/user=" << run.average_regret() << '\n';
          }
        }
        const MeanStd ms = mean_std(finals);
        summary << hash << ',' << to_string(algo) << ',' << horizon << ',' << cfg.users << ',' << ms.mean << ','
                << ms.std << ',' << ms.n << '\n';
      }
    }
  } else {
    curves << "config_hash,algorithm,seed,users_evaluated,relative_ctr\n";
    summary << "config_hash,algorithm,users_evaluated,mean_relative_ctr,std_relative_ctr,seeds,terminated_sessions\n";
    const OfflineData data = prepare_offline(cfg);
    for (auto algo : cfg.roster) {
      std::vector<double> finals;
      long terminated = 0;
      for (auto seed : cfg.seeds()) {
        const OfflineRun run = run_offline(cfg, data, algo, seed);
        for (const auto& [n, ctr] : run.test.curve) {
          curves << hash << ',' << to_string(algo) << ',' << seed << ',' << n << ','
                 << (run.log_ctr > 0 ? ctr / run.log_ctr : 0.0) << '\n';
        }
        finals.push_back(run.relative_ctr());
        terminated += run.test.terminated;
        if (progress) *progress << to_string(algo) << " seed=" << seed << " relative_ctr=" << run.relative_ctr() << '\n';
      }
      const MeanStd ms = mean_std(finals);
      summary << hash << ',' << to_string(algo) << ',' << data.test_users.size() << ',' << ms.mean << ',' << ms.std
              << ',' << ms.n << ',' << terminated << '\n';
    }
  }

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream(std::filesystem::path(cfg.output_dir) / "curves.csv") << curves.str();
    std::ofstream(std::filesystem::path(cfg.output_dir) / "summary.csv") << summary.str();
    std::ofstream(std::filesystem::path(cfg.output_dir) / "config.json") << config_to_json(cfg).dump(2) << '\n';
  }
  return summary.str();
}

}  // namespace lcb
