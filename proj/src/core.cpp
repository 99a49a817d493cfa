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

#include "lcb/core.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

namespace lcb {

using nlohmann::json;

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      line_(line) {}

Context::Context(Matrix arms, int step) : arms_(std::move(arms)), step_(step) {
  if (arms_.rows() < 1 || arms_.cols() < 1) {
    throw std::invalid_argument("Context: need at least one arm of positive dimension");
  }
  if (!arms_.allFinite()) {
    throw std::invalid_argument("Context: non-finite feature");
  }
  if ((arms_.rowwise().norm().array() > 1.0 + kNormTolerance).any()) {
    throw std::invalid_argument("Context: arm feature norm exceeds 1");
  }
  if (step_ < 1) {
    throw std::invalid_argument("Context: step index must be positive");
  }
}

void validate(const InteractionRecord& rec) {
  if (!(rec.reward >= 0.0 && rec.reward <= 1.0)) {
    throw std::invalid_argument("InteractionRecord: reward outside [0, 1]");
  }
  if (rec.context.num_arms() == 0) {
    throw std::invalid_argument("InteractionRecord: empty context");
  }
  if (rec.chosen_arm >= static_cast<std::size_t>(rec.context.num_arms())) {
    throw std::invalid_argument("InteractionRecord: chosen arm out of range");
  }
  if (rec.step < 1) {
    throw std::invalid_argument("InteractionRecord: step must be positive");
  }
}

void InteractionLog::append(InteractionRecord rec) {
  validate(rec);
  auto it = last_step_.find(rec.user_id);
  const int expected = it == last_step_.end() ? 1 : it->second + 1;
  if (rec.step != expected) {
    throw std::invalid_argument("InteractionLog: user " + std::to_string(rec.user_id) +
                                " expected step " + std::to_string(expected) + ", got " +
                                std::to_string(rec.step));
  }
  last_step_[rec.user_id] = rec.step;
  records_.push_back(std::move(rec));
}

std::vector<InteractionRecord> InteractionLog::iid_records() const {
  std::vector<InteractionRecord> out;
  for (const auto& rec : records_) {
    if (rec.iid_sample) out.push_back(rec);
  }
  return out;
}

std::vector<int> InteractionLog::users() const {
  std::vector<int> order;
  std::unordered_set<int> seen;
  for (const auto& rec : records_) {
    if (seen.insert(rec.user_id).second) order.push_back(rec.user_id);
  }
  return order;
}

InteractionLog append(InteractionLog log, InteractionRecord rec) {
  log.append(std::move(rec));
  return log;
}

std::vector<UserData> training_pairs(const InteractionLog& log, bool iid_only) {
  std::unordered_map<int, std::size_t> slot;
  std::vector<int> order;
  std::vector<std::vector<const InteractionRecord*>> grouped;
  for (const auto& rec : log.records()) {
    if (iid_only && !rec.iid_sample) continue;
    auto [it, inserted] = slot.try_emplace(rec.user_id, grouped.size());
    if (inserted) {
      order.push_back(rec.user_id);
      grouped.emplace_back();
    }
    grouped[it->second].push_back(&rec);
  }
  std::vector<UserData> out;
  out.reserve(grouped.size());
  for (std::size_t u = 0; u < grouped.size(); ++u) {
    const auto& recs = grouped[u];
    const Eigen::Index d = recs.front()->context.dim();
    UserData data{order[u], Matrix(static_cast<Eigen::Index>(recs.size()), d),
                  Vector(static_cast<Eigen::Index>(recs.size()))};
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      data.features.row(row) =
          recs[i]->context.arms().row(static_cast<Eigen::Index>(recs[i]->chosen_arm));
      data.rewards(row) = recs[i]->reward;
    }
    out.push_back(std::move(data));
  }
  return out;
}

std::size_t total_pairs(const std::vector<UserData>& data) {
  std::size_t n = 0;
  for (const auto& u : data) n += static_cast<std::size_t>(u.size());
  return n;
}

namespace {

json record_to_json(const InteractionRecord& rec) {
  json arms = json::array();
  const Matrix& m = rec.context.arms();
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(a, j));
    arms.push_back(std::move(row));
  }
  return json{{"user_id", rec.user_id}, {"step", rec.step},
              {"arms", std::move(arms)}, {"chosen_arm", rec.chosen_arm},
              {"reward", rec.reward},    {"iid_sample", rec.iid_sample}};
}

InteractionRecord record_from_json(const json& j) {
  InteractionRecord rec;
  rec.user_id = j.at("user_id").get<int>();
  rec.step = j.at("step").get<int>();
  const json& arms = j.at("arms");
  if (!arms.is_array() || arms.empty()) throw std::invalid_argument("arms must be a non-empty array");
  const auto k = static_cast<Eigen::Index>(arms.size());
  const auto d = static_cast<Eigen::Index>(arms.front().size());
  Matrix m(k, d);
  for (Eigen::Index a = 0; a < k; ++a) {
    const json& row = arms[static_cast<std::size_t>(a)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw std::invalid_argument("arms rows must share one dimension");
    }
    for (Eigen::Index c = 0; c < d; ++c) m(a, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  rec.context = Context(std::move(m), rec.step);
  rec.chosen_arm = j.at("chosen_arm").get<std::size_t>();
  rec.reward = j.at("reward").get<double>();
  rec.iid_sample = j.at("iid_sample").get<bool>();
  return rec;
}

}  // namespace

void write_log(std::ostream& out, const InteractionLog& log) {
  if (log.phase1_users()) {
    out << json{{"phase1_users", *log.phase1_users()}}.dump() << '\n';
  }
  for (const auto& rec : log.records()) out << record_to_json(rec).dump() << '\n';
}

InteractionLog read_log(std::istream& in) {
  InteractionLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("phase1_users") && !j.contains("user_id")) {
        log.set_phase1_users(j.at("phase1_users").get<int>());
        continue;
      }
      log.append(record_from_json(j));
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return log;
}

void save_log(const std::string& path, const InteractionLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_log(out, log);
}

InteractionLog load_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_log(in);
}

}  // namespace lcb
