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

#ifndef LCB_CORE_HPP_
#define LCB_CORE_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace lcb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raised when a structured text file cannot be decoded.  `line` is 1-based,
// 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// The K arm feature vectors shown at one step.  Arms are stored as the rows
// of a K x d matrix so that `arms() * beta` yields every arm's score.
class Context {
 public:
  static constexpr double kNormTolerance = 1e-9;

  Context() = default;
  // Throws std::invalid_argument if K == 0, d == 0, any entry is non-finite
  // or any arm has Euclidean norm above 1.
  explicit Context(Matrix arms, int step = 1);

  const Matrix& arms() const { return arms_; }
  Eigen::Index num_arms() const { return arms_.rows(); }
  Eigen::Index dim() const { return arms_.cols(); }
  Vector arm(Eigen::Index a) const { return arms_.row(a).transpose(); }
  int step() const { return step_; }

  friend bool operator==(const Context& a, const Context& b) {
    return a.step_ == b.step_ && a.arms_.rows() == b.arms_.rows() &&
           a.arms_.cols() == b.arms_.cols() && a.arms_ == b.arms_;
  }

 private:
  Matrix arms_;
  int step_ = 1;
};

struct InteractionRecord {
  int user_id = 0;
  int step = 1;
  Context context;
  std::size_t chosen_arm = 0;
  double reward = 0.0;
  bool iid_sample = false;

  Vector chosen_features() const { return context.arm(static_cast<Eigen::Index>(chosen_arm)); }

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

// Throws std::invalid_argument when the record breaks its invariants.
void validate(const InteractionRecord& rec);

// Append-only interaction store.  Per-user step indices must be contiguous
// starting from 1.
class InteractionLog {
 public:
  void append(InteractionRecord rec);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<InteractionRecord>& records() const { return records_; }
  const InteractionRecord& operator[](std::size_t i) const { return records_[i]; }

  // Number of users served in phase 1 (the phase boundary); unset when the
  // log was ingested without running phase 1.
  std::optional<int> phase1_users() const { return phase1_users_; }
  void set_phase1_users(int users) { phase1_users_ = users; }

  std::vector<InteractionRecord> iid_records() const;
  // Distinct user ids in order of first appearance.
  std::vector<int> users() const;

  friend bool operator==(const InteractionLog& a, const InteractionLog& b) {
    return a.records_ == b.records_ && a.phase1_users_ == b.phase1_users_;
  }

 private:
  std::vector<InteractionRecord> records_;
  std::unordered_map<int, int> last_step_;
  std::optional<int> phase1_users_;
};

// Value-returning form of InteractionLog::append.
InteractionLog append(InteractionLog log, InteractionRecord rec);

// One user's training data: chosen-arm features as rows of `features`.
struct UserData {
  int user_id = 0;
  Matrix features;
  Vector rewards;

  Eigen::Index size() const { return rewards.size(); }
};

// Groups (feature, reward) pairs by user, ordered by each user's first
// selected record.  Users with no selected records are omitted.
std::vector<UserData> training_pairs(const InteractionLog& log, bool iid_only);

std::size_t total_pairs(const std::vector<UserData>& data);

// JSON-lines codec.  Each record is one object with keys user_id, step, arms,
// chosen_arm, reward, iid_sample.  The phase boundary, when set, is written
// as a leading {"phase1_users": J} line.
void write_log(std::ostream& out, const InteractionLog& log);
InteractionLog read_log(std::istream& in);
void save_log(const std::string& path, const InteractionLog& log);
InteractionLog load_log(const std::string& path);

}  // namespace lcb

#endif  // LCB_CORE_HPP_
