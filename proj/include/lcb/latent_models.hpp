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

#ifndef LCB_LATENT_MODELS_HPP_
#define LCB_LATENT_MODELS_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "lcb/core.hpp"

namespace lcb {

struct MixtureComponent {
  double pi = 1.0;
  Vector beta;
  double sigma2 = 1.0;

  friend bool operator==(const MixtureComponent& a, const MixtureComponent& b) {
    return a.pi == b.pi && a.sigma2 == b.sigma2 && a.beta.size() == b.beta.size() &&
           a.beta == b.beta;
  }
};

// Latent classes {pi_h, beta_h, sigma2_h}.  Mixing weights sum to one.
class MixtureModel {
 public:
  static constexpr double kWeightTolerance = 1e-9;

  MixtureModel() = default;
  // Throws std::invalid_argument on an empty list, mismatched dimensions,
  // non-positive variance or weights that do not sum to one.
  explicit MixtureModel(std::vector<MixtureComponent> components);

  std::size_t size() const { return components_.size(); }
  Eigen::Index dim() const { return components_.empty() ? 0 : components_.front().beta.size(); }
  const std::vector<MixtureComponent>& components() const { return components_; }
  const MixtureComponent& operator[](std::size_t h) const { return components_[h]; }

  friend bool operator==(const MixtureModel&, const MixtureModel&) = default;

 private:
  std::vector<MixtureComponent> components_;
};

enum class PolicyKind { deterministic, probabilistic };

struct Policy {
  PolicyKind kind = PolicyKind::deterministic;
  Vector beta;
  double temperature = 1.0;  // probabilistic policies only
};

using PolicySet = std::vector<Policy>;

PolicySet build_policies(const MixtureModel& model, PolicyKind kind, double temperature = 1.0);

// argmax_a beta^T x_a, lowest index on ties.
std::size_t deterministic_action(const Policy& policy, const Context& ctx);

// Softmax of beta^T x_a / temperature over the arms.
Vector probabilistic_action(const Policy& policy, const Context& ctx);

// Minimum pairwise Euclidean distance between component coefficient vectors.
double min_separation(const MixtureModel& model);

// Model files are JSON: {"format": "lcb-mixture", "version": 1,
// "components": [{"pi": ..., "beta": [...], "sigma2": ...}, ...]}.
inline constexpr int kModelFormatVersion = 1;
void write_model(std::ostream& out, const MixtureModel& model);
MixtureModel read_model(std::istream& in);
void save_model(const std::string& path, const MixtureModel& model);
MixtureModel load_model(const std::string& path);

}  // namespace lcb

#endif  // LCB_LATENT_MODELS_HPP_
