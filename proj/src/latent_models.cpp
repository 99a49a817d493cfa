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

#include "lcb/latent_models.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace lcb {

using nlohmann::json;

MixtureModel::MixtureModel(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("MixtureModel: need at least one component");
  const Eigen::Index d = components_.front().beta.size();
  if (d < 1) throw std::invalid_argument("MixtureModel: empty coefficient vector");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.beta.size() != d) throw std::invalid_argument("MixtureModel: dimension mismatch");
    if (!c.beta.allFinite()) throw std::invalid_argument("MixtureModel: non-finite coefficient");
    if (!(c.sigma2 > 0.0) || !std::isfinite(c.sigma2)) {
      throw std::invalid_argument("MixtureModel: variance must be positive");
    }
    if (!(c.pi >= 0.0)) throw std::invalid_argument("MixtureModel: negative mixing weight");
    total += c.pi;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw std::invalid_argument("MixtureModel: mixing weights must sum to 1");
  }
}

PolicySet build_policies(const MixtureModel& model, PolicyKind kind, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("build_policies: temperature must be positive");
  PolicySet out;
  out.reserve(model.size());
  for (const auto& c : model.components()) out.push_back(Policy{kind, c.beta, temperature});
  return out;
}

std::size_t deterministic_action(const Policy& policy, const Context& ctx) {
  if (policy.beta.size() != ctx.dim()) throw std::invalid_argument("deterministic_action: dimension mismatch");
  const Vector scores = ctx.arms() * policy.beta;
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < scores.size(); ++a) {
    if (scores(a) > scores(best)) best = a;
  }
  return static_cast<std::size_t>(best);
}

Vector probabilistic_action(const Policy& policy, const Context& ctx) {
  if (policy.beta.size() != ctx.dim()) throw std::invalid_argument("probabilistic_action: dimension mismatch");
  if (!(policy.temperature > 0.0)) throw std::invalid_argument("probabilistic_action: temperature must be positive");
  Vector scores = (ctx.arms() * policy.beta) / policy.temperature;
  if (!scores.allFinite()) throw std::invalid_argument("probabilistic_action: non-finite score");
  scores.array() -= scores.maxCoeff();
  Vector p = scores.array().exp().matrix();
  p /= p.sum();
  return p;
}

double min_separation(const MixtureModel& model) {
  if (model.size() < 2) throw std::invalid_argument("min_separation: need at least two components");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.size(); ++i) {
    for (std::size_t j = i + 1; j < model.size(); ++j) {
      best = std::min(best, (model[i].beta - model[j].beta).norm());
    }
  }
  return best;
}

void write_model(std::ostream& out, const MixtureModel& model) {
  json comps = json::array();
  for (const auto& c : model.components()) {
    comps.push_back({{"pi", c.pi},
                     {"beta", std::vector<double>(c.beta.data(), c.beta.data() + c.beta.size())},
                     {"sigma2", c.sigma2}});
  }
  out << json{{"format", "lcb-mixture"}, {"version", kModelFormatVersion}, {"components", comps}}.dump(2)
      << '\n';
}

MixtureModel read_model(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "lcb-mixture") throw ParseError("model file: unknown format");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ParseError("model file: unsupported version " + std::to_string(version));
    }
    std::vector<MixtureComponent> comps;
    for (const auto& c : j.at("components")) {
      const auto beta = c.at("beta").get<std::vector<double>>();
      comps.push_back(MixtureComponent{c.at("pi").get<double>(),
                                       Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size())),
                                       c.at("sigma2").get<double>()});
    }
    return MixtureModel(std::move(comps));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

void save_model(const std::string& path, const MixtureModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_model(out, model);
}

MixtureModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_model(in);
}

}  // namespace lcb
