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

#ifndef LCB_QUEUE_EVAL_HPP_
#define LCB_QUEUE_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lcb/core.hpp"
#include "lcb/environment.hpp"

namespace lcb {

inline constexpr int kNewsCategories = 21;
inline constexpr int kProjectedDim = 6;

// One shown article in a logged-data file.  File format: CSV with header
// `user_id,article_id,categories,click,timestamp`; categories are 0-based ids
// joined by '|', click is 0 or 1.
struct Impression {
  int user_id = 0;
  long article_id = 0;
  std::vector<int> categories;
  int click = 0;
  long timestamp = 0;
};

void write_impressions(std::ostream& out, const std::vector<Impression>& impressions);

// Per-user FIFO queues of click labels, one queue per arm category.
class QueueBank {
 public:
  explicit QueueBank(int num_categories = kNewsCategories);

  int num_categories() const { return num_categories_; }
  void push(int user_id, int category, int label);
  // Front label of the queue, or nullopt once it is empty.
  std::optional<int> pop(int user_id, int category);
  std::size_t queue_size(int user_id, int category) const;

  // Users in order of first appearance.
  const std::vector<int>& users() const { return users_; }
  bool contains(int user_id) const { return queues_.count(user_id) > 0; }
  std::size_t total_pushed() const { return pushed_; }
  std::size_t total_popped() const { return popped_; }
  std::size_t remaining() const { return pushed_ - popped_; }

 private:
  struct UserQueues {
    std::vector<std::vector<std::uint8_t>> labels;
    std::vector<std::size_t> head;
  };
  int num_categories_;
  std::unordered_map<int, UserQueues> queues_;
  std::vector<int> users_;
  std::size_t pushed_ = 0;
  std::size_t popped_ = 0;
};

struct IngestResult {
  QueueBank bank;
  std::map<long, std::vector<int>> articles;  // article id -> categories
  long impressions = 0;
  long clicks = 0;
  std::unordered_map<int, std::pair<long, long>> user_clicks;  // user -> (clicks, impressions)

  double log_ctr() const { return impressions == 0 ? 0.0 : static_cast<double>(clicks) / impressions; }
  // Click rate of the logged data restricted to `users`.
  double log_ctr(const std::vector<int>& users) const;
  // Distinct articles as multi-hot rows.
  Matrix article_vectors() const;
};

// Each label is pushed to the queue of every category its article belongs
// to.  Throws ParseError (with line number) on malformed lines or unknown
// category ids.
IngestResult ingest_log(std::istream& in, int num_categories = kNewsCategories);
IngestResult ingest_impressions(const std::vector<Impression>& impressions, int num_categories = kNewsCategories);

struct ArmProjection {
  Vector mean;                  // raw-space mean
  Matrix components;            // target_dim x raw_dim, orthonormal rows
  Vector explained_variance;    // eigenvalues of the kept directions
  Vector apply(const Vector& raw) const;
};

// Top principal directions of the centered rows.  Throws if the data has
// fewer than `target_dim` non-degenerate directions.
ArmProjection pca_fit(const Matrix& raw_rows, int target_dim = kProjectedDim);
Vector pca_apply(const ArmProjection& projection, const Vector& raw);

// One arm per category: the projected one-hot category vector, uniformly
// rescaled so every arm has norm at most 1.
Context category_context(const ArmProjection& projection, int num_categories = kNewsCategories);

struct QueueEvalResult {
  long clicks = 0;
  long pulls = 0;
  int users = 0;
  int terminated = 0;  // sessions ended by an empty queue
  std::vector<std::pair<int, double>> curve;  // (users evaluated, CTR so far)

  double ctr() const { return pulls == 0 ? 0.0 : static_cast<double>(clicks) / pulls; }
};

// Replays `users` through `algo`: every step shows the fixed category
// context, the chosen category's queue front is the reward, and the session
// stops at `horizon` steps or when the chosen queue is empty.
QueueEvalResult evaluate(QueueBank& bank, const std::vector<int>& users, const Context& arms,
                         InteractiveAlgorithm& algo, int horizon, int report_every = 0);

struct SyntheticLogSpec {
  int users = 1000;
  int classes = 10;
  int categories = kNewsCategories;
  int major_categories = 6;       // class preferences live on these
  int impressions_per_user = 100;
  int articles = 2000;
  double major_popularity = 4.0;  // sampling weight of a major vs minor category
  double multi_category_prob = 0.3;
  double high_rate = 0.6;         // click rate on a preferred category
  double low_rate = 0.05;
  int first_user_id = 1;
  std::uint64_t seed = 1;
};

struct SyntheticLog {
  std::vector<Impression> impressions;
  Matrix class_rates;           // classes x categories
  std::vector<int> user_class;  // indexed by user_id - first_user_id
};

SyntheticLog generate_log(const SyntheticLogSpec& spec);

}  // namespace lcb

#endif  // LCB_QUEUE_EVAL_HPP_
