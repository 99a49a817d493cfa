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

#include "lcb/queue_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lcb/random.hpp"

namespace lcb {

void write_impressions(std::ostream& out, const std::vector<Impression>& impressions) {
  out << "user_id,article_id,categories,click,timestamp\n";
  for (const auto& imp : impressions) {
    out << imp.user_id << ',' << imp.article_id << ',';
    for (std::size_t i = 0; i < imp.categories.size(); ++i) out << (i ? "|" : "") << imp.categories[i];
    out << ',' << imp.click << ',' << imp.timestamp << '\n';
  }
}

// -- QueueBank ----------------------------------------------------------------

QueueBank::QueueBank(int num_categories) : num_categories_(num_categories) {
  if (num_categories < 1) throw std::invalid_argument("QueueBank: need at least one category");
}

void QueueBank::push(int user_id, int category, int label) {
  if (category < 0 || category >= num_categories_) throw std::out_of_range("QueueBank: unknown category");
  if (label != 0 && label != 1) throw std::invalid_argument("QueueBank: labels must be 0 or 1");
  auto [it, inserted] = queues_.try_emplace(user_id);
  if (inserted) {
    it->second.labels.resize(static_cast<std::size_t>(num_categories_));
    it->second.head.assign(static_cast<std::size_t>(num_categories_), 0);
    users_.push_back(user_id);
  }
  it->second.labels[static_cast<std::size_t>(category)].push_back(static_cast<std::uint8_t>(label));
  ++pushed_;
}

std::optional<int> QueueBank::pop(int user_id, int category) {
  if (category < 0 || category >= num_categories_) throw std::out_of_range("QueueBank: unknown category");
  auto it = queues_.find(user_id);
  if (it == queues_.end()) return std::nullopt;
  const auto c = static_cast<std::size_t>(category);
  auto& head = it->second.head[c];
  const auto& q = it->second.labels[c];
  if (head >= q.size()) return std::nullopt;
  ++popped_;
  return static_cast<int>(q[head++]);
}

std::size_t QueueBank::queue_size(int user_id, int category) const {
  auto it = queues_.find(user_id);
  if (it == queues_.end() || category < 0 || category >= num_categories_) return 0;
  const auto c = static_cast<std::size_t>(category);
  return it->second.labels[c].size() - it->second.head[c];
}

// -- Ingestion ----------------------------------------------------------------

double IngestResult::log_ctr(const std::vector<int>& users) const {
  long clicks_sum = 0;
  long shown = 0;
  for (int u : users) {
    auto it = user_clicks.find(u);
    if (it == user_clicks.end()) continue;
    clicks_sum += it->second.first;
    shown += it->second.second;
  }
  return shown == 0 ? 0.0 : static_cast<double>(clicks_sum) / static_cast<double>(shown);
}

Matrix IngestResult::article_vectors() const {
  Matrix rows = Matrix::Zero(static_cast<Eigen::Index>(articles.size()), bank.num_categories());
  Eigen::Index i = 0;
  for (const auto& [id, cats] : articles) {
    for (int c : cats) rows(i, c) = 1.0;
    ++i;
  }
  return rows;
}

namespace {

void add_impression(IngestResult& result, const Impression& imp, int num_categories) {
  if (imp.categories.empty()) throw std::invalid_argument("article without categories");
  if (imp.click != 0 && imp.click != 1) throw std::invalid_argument("click label must be 0 or 1");
  for (int c : imp.categories) {
    if (c < 0 || c >= num_categories) throw std::invalid_argument("unknown category id " + std::to_string(c));
  }
  for (int c : imp.categories) result.bank.push(imp.user_id, c, imp.click);
  std::vector<int> cats = imp.categories;
  std::sort(cats.begin(), cats.end());
  result.articles.try_emplace(imp.article_id, std::move(cats));
  ++result.impressions;
  result.clicks += imp.click;
  auto& uc = result.user_clicks[imp.user_id];
  uc.first += imp.click;
  uc.second += 1;
}

template <typename T>
T parse_number(const std::string& field, const char* name) {
  T value{};
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument(std::string("bad ") + name + " '" + field + "'");
  return value;
}

Impression parse_impression(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (fields.size() != 5) throw std::invalid_argument("expected 5 comma-separated fields");
  for (auto& f : fields) {
    f.erase(0, f.find_first_not_of(" \t\r"));
    f.erase(f.find_last_not_of(" \t\r") + 1);
  }
  Impression imp;
  imp.user_id = parse_number<int>(fields[0], "user_id");
  imp.article_id = parse_number<long>(fields[1], "article_id");
  std::stringstream cs(fields[2]);
  std::string cat;
  while (std::getline(cs, cat, '|')) imp.categories.push_back(parse_number<int>(cat, "category"));
  imp.click = parse_number<int>(fields[3], "click");
  imp.timestamp = parse_number<long>(fields[4], "timestamp");
  return imp;
}

}  // namespace

IngestResult ingest_log(std::istream& in, int num_categories) {
  IngestResult result{QueueBank(num_categories), {}, 0, 0, {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line_no == 1 && line.rfind("user_id", 0) == 0) continue;
    try {
      add_impression(result, parse_impression(line), num_categories);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return result;
}

IngestResult ingest_impressions(const std::vector<Impression>& impressions, int num_categories) {
  IngestResult result{QueueBank(num_categories), {}, 0, 0, {}};
  for (const auto& imp : impressions) add_impression(result, imp, num_categories);
  return result;
}

// -- PCA ----------------------------------------------------------------------

Vector ArmProjection::apply(const Vector& raw) const {
  if (raw.size() != mean.size()) throw std::invalid_argument("ArmProjection: dimension mismatch");
  return components * (raw - mean);
}

ArmProjection pca_fit(const Matrix& raw_rows, int target_dim) {
  if (target_dim < 1 || target_dim > raw_rows.cols()) throw std::invalid_argument("pca_fit: bad target dimension");
  if (raw_rows.rows() < 2) throw std::invalid_argument("pca_fit: need at least two rows");
  ArmProjection p;
  p.mean = raw_rows.colwise().mean().transpose();
  const Matrix centered = raw_rows.rowwise() - p.mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(raw_rows.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigendecomposition failed");
  // Eigenvalues are ascending.
  const Eigen::Index dim = cov.rows();
  const double largest = std::max(eig.eigenvalues()(dim - 1), 0.0);
  const double smallest_kept = eig.eigenvalues()(dim - target_dim);
  if (!(largest > 0.0) || smallest_kept <= 1e-10 * largest) {
    throw std::invalid_argument("pca_fit: data rank below target dimension");
  }
  p.components.resize(target_dim, dim);
  p.explained_variance.resize(target_dim);
  for (int k = 0; k < target_dim; ++k) {
    Vector v = eig.eigenvectors().col(dim - 1 - k);
    // Sign convention: largest-magnitude entry positive.
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    p.components.row(k) = v.transpose();
    p.explained_variance(k) = eig.eigenvalues()(dim - 1 - k);
  }
  return p;
}

Vector pca_apply(const ArmProjection& projection, const Vector& raw) { return projection.apply(raw); }

Context category_context(const ArmProjection& projection, int num_categories) {
  if (projection.mean.size() != num_categories) throw std::invalid_argument("category_context: dimension mismatch");
  Matrix arms(num_categories, projection.components.rows());
  for (int c = 0; c < num_categories; ++c) {
    arms.row(c) = projection.apply(Vector::Unit(num_categories, c)).transpose();
  }
  const double max_norm = arms.rowwise().norm().maxCoeff();
  if (max_norm > 1.0) arms /= max_norm;
  return Context(std::move(arms));
}

// -- Queue evaluation ---------------------------------------------------------

namespace {

class QueueUserSession : public UserSession {
 public:
  QueueUserSession(QueueBank& bank, int user_id, const Context& arms, int horizon)
      : bank_(bank), user_id_(user_id), arms_(arms), horizon_(horizon) {}

  int user_id() const override { return user_id_; }
  int horizon() const override { return horizon_; }
  std::optional<Context> next_context() override {
    if (step_ >= horizon_) return std::nullopt;
    ++step_;
    return Context(arms_.arms(), step_);
  }
  std::optional<double> pull(std::size_t arm) override {
    const std::optional<int> label = bank_.pop(user_id_, static_cast<int>(arm));
    if (!label) return std::nullopt;
    return static_cast<double>(*label);
  }

 private:
  QueueBank& bank_;
  int user_id_;
  const Context& arms_;
  int horizon_;
  int step_ = 0;
};

}  // namespace

QueueEvalResult evaluate(QueueBank& bank, const std::vector<int>& users, const Context& arms,
                         InteractiveAlgorithm& algo, int horizon, int report_every) {
  if (arms.num_arms() != bank.num_categories()) throw std::invalid_argument("evaluate: arm/category mismatch");
  QueueEvalResult result;
  for (int user : users) {
    QueueUserSession session(bank, user, arms, horizon);
    const UserOutcome o = run_user(algo, session);
    result.users += 1;
    result.pulls += o.steps;
    result.clicks += std::lround(o.reward);
    if (o.terminated_early) result.terminated += 1;
    if (report_every > 0 && result.users % report_every == 0) result.curve.emplace_back(result.users, result.ctr());
  }
  if (report_every > 0 && (result.curve.empty() || result.curve.back().first != result.users)) {
    result.curve.emplace_back(result.users, result.ctr());
  }
  return result;
}

// -- Synthetic logs -----------------------------------------------------------

SyntheticLog generate_log(const SyntheticLogSpec& spec) {
  if (spec.users < 0 || spec.classes < 1 || spec.categories < 1 || spec.articles < 1) {
    throw std::invalid_argument("generate_log: bad sizes");
  }
  if (spec.major_categories < 1 || spec.major_categories > spec.categories) {
    throw std::invalid_argument("generate_log: major_categories out of range");
  }
  Rng rng(derive_seed(spec.seed, 11));
  const int m = spec.major_categories;

  SyntheticLog out;
  out.class_rates = Matrix::Constant(spec.classes, spec.categories, spec.low_rate);
  for (int k = 0; k < spec.classes; ++k) {
    const int a = k % m;
    out.class_rates(k, a) = spec.high_rate;
    if (k >= m) out.class_rates(k, (a + 1 + (k / m - 1)) % m) = spec.high_rate;
  }

  std::vector<double> popularity(static_cast<std::size_t>(spec.categories), 1.0);
  for (int c = 0; c < m; ++c) popularity[static_cast<std::size_t>(c)] = spec.major_popularity;

  std::vector<std::vector<int>> article_cats(static_cast<std::size_t>(spec.articles));
  for (auto& cats : article_cats) {
    const int first = static_cast<int>(sample_categorical(rng, popularity));
    cats.push_back(first);
    if (spec.categories > 1 && sample_uniform(rng) < spec.multi_category_prob) {
      int second = first;
      while (second == first) second = static_cast<int>(sample_categorical(rng, popularity));
      cats.push_back(second);
      std::sort(cats.begin(), cats.end());
    }
  }

  long timestamp = 0;
  out.user_class.resize(static_cast<std::size_t>(spec.users));
  out.impressions.reserve(static_cast<std::size_t>(spec.users) * static_cast<std::size_t>(spec.impressions_per_user));
  for (int u = 0; u < spec.users; ++u) {
    const int cls = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.classes));
    out.user_class[static_cast<std::size_t>(u)] = cls;
    for (int i = 0; i < spec.impressions_per_user; ++i) {
      const auto article = static_cast<long>(rng() % static_cast<std::uint64_t>(spec.articles));
      const auto& cats = article_cats[static_cast<std::size_t>(article)];
      double rate = 0.0;
      for (int c : cats) rate += out.class_rates(cls, c);
      rate /= static_cast<double>(cats.size());
      const int click = sample_uniform(rng) < rate ? 1 : 0;
      out.impressions.push_back(Impression{spec.first_user_id + u, article, cats, click, ++timestamp});
    }
  }
  return out;
}

}  // namespace lcb
