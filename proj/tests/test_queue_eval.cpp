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
#include <sstream>

#include "lcb/baselines.hpp"
#include "lcb/queue_eval.hpp"

using namespace lcb;

namespace {

// Always picks one fixed arm.
class FixedArm : public InteractiveAlgorithm {
 public:
  explicit FixedArm(std::size_t arm) : arm_(arm) {}
  void begin_user(int, int) override {}
  std::size_t select(const Context&) override { return arm_; }
  void observe(double reward) override { rewards.push_back(reward); }
  std::vector<double> rewards;

 private:
  std::size_t arm_;
};

Context identity_arms(int k) {
  return Context(Matrix::Identity(k, k));
}

}  // namespace

TEST_CASE("an impression feeds every category it belongs to") {
  const auto r = ingest_impressions({Impression{5, 100, {1, 3}, 1, 1}, Impression{5, 101, {3}, 0, 2}}, 4);
  CHECK(r.bank.queue_size(5, 1) == 1);
  CHECK(r.bank.queue_size(5, 3) == 2);
  CHECK(r.bank.queue_size(5, 0) == 0);
  CHECK(r.bank.queue_size(6, 3) == 0);
  CHECK(r.bank.total_pushed() == 3);
  CHECK(r.impressions == 2);
  CHECK(r.clicks == 1);
  CHECK(r.articles.size() == 2);
  QueueBank bank = r.bank;
  CHECK(bank.pop(5, 3) == 1);
  CHECK(bank.pop(5, 3) == 0);
  CHECK_FALSE(bank.pop(5, 3).has_value());
  CHECK_FALSE(bank.pop(9, 3).has_value());
  CHECK(bank.total_popped() == 2);
  CHECK(bank.remaining() == 1);
  CHECK_THROWS_AS(bank.pop(5, 4), std::out_of_range);
  CHECK_THROWS_AS(bank.push(5, 0, 2), std::invalid_argument);
}

TEST_CASE("log files") {
  SUBCASE("empty input gives an empty bank") {
    std::istringstream in("");
    const auto r = ingest_log(in);
    CHECK(r.bank.users().empty());
    CHECK(r.bank.total_pushed() == 0);
    CHECK(r.log_ctr() == 0.0);
  }
  SUBCASE("round trip and push totals") {
    SyntheticLogSpec spec;
    spec.users = 30;
    spec.impressions_per_user = 40;
    const SyntheticLog log = generate_log(spec);
    std::ostringstream out;
    write_impressions(out, log.impressions);
    std::istringstream in(out.str());
    const auto r = ingest_log(in);
    std::size_t expected = 0;
    long clicks = 0;
    for (const auto& imp : log.impressions) {
      expected += imp.categories.size();
      clicks += imp.click;
    }
    CHECK(r.bank.total_pushed() == expected);
    CHECK(r.impressions == 30 * 40);
    CHECK(r.clicks == clicks);
    CHECK(r.bank.users().size() == 30);
    CHECK(r.bank.users().front() == 1);
  }
  SUBCASE("malformed lines report their line number") {
    std::istringstream bad_click("user_id,article_id,categories,click,timestamp\n1,2,3,1,4\n1,2,3,7,5\n");
    try {
      ingest_log(bad_click);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    std::istringstream bad_cat("1,2,3|40,1,4\n");
    try {
      ingest_log(bad_cat);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
    std::istringstream short_line("1,2,3,1\n");
    CHECK_THROWS_AS(ingest_log(short_line), ParseError);
  }
}

TEST_CASE("logged click rate restricted to users") {
  const auto r = ingest_impressions({Impression{1, 1, {0}, 1, 1}, Impression{1, 2, {0}, 0, 2},
                                     Impression{2, 1, {0}, 1, 3}, Impression{3, 1, {0}, 0, 4}},
                                    2);
  CHECK(r.log_ctr() == 0.5);
  CHECK(r.log_ctr({1}) == 0.5);
  CHECK(r.log_ctr({2}) == 1.0);
  CHECK(r.log_ctr({2, 3}) == 0.5);
  CHECK(r.log_ctr({42}) == 0.0);
}

TEST_CASE("principal components") {
  Rng rng(12);
  std::normal_distribution<double> n01;
  const int raw = 21;
  const int rows = 300;
  // Orthonormal 6-dimensional basis of a random subspace.
  Matrix g(raw, 6);
  for (int i = 0; i < raw; ++i)
    for (int j = 0; j < 6; ++j) g(i, j) = n01(rng);
  const Matrix basis = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(raw, 6);
  Vector offset(raw);
  for (int i = 0; i < raw; ++i) offset(i) = n01(rng);
  Matrix data(rows, raw);
  for (int r = 0; r < rows; ++r) {
    Vector c(6);
    for (int j = 0; j < 6; ++j) c(j) = (j + 1) * n01(rng);
    data.row(r) = (offset + basis * c).transpose();
  }

  const ArmProjection p = pca_fit(data, 6);
  CHECK((p.components * p.components.transpose() - Matrix::Identity(6, 6)).norm() < 1e-10);
  CHECK(p.apply(p.mean).norm() < 1e-12);
  for (int r = 0; r < rows; ++r) {
    const Vector x = data.row(r).transpose();
    const Vector back = p.mean + p.components.transpose() * pca_apply(p, x);
    REQUIRE((back - x).norm() < 1e-9);
  }
  // Oracle: squared singular values of the centered data.
  const Matrix centered = data.rowwise() - data.colwise().mean();
  Eigen::JacobiSVD<Matrix> svd(centered);
  for (int k = 0; k < 6; ++k) {
    const double expected = svd.singularValues()(k) * svd.singularValues()(k) / (rows - 1);
    CHECK(std::abs(p.explained_variance(k) - expected) <= 1e-8 * std::max(1.0, expected));
  }
  for (int k = 1; k < 6; ++k) CHECK(p.explained_variance(k) <= p.explained_variance(k - 1));

  CHECK_THROWS_AS(pca_fit(data, 7), std::invalid_argument);
  CHECK_THROWS_AS(pca_fit(data, 0), std::invalid_argument);
  CHECK_THROWS_AS(pca_fit(data.topRows(1), 1), std::invalid_argument);
  CHECK_THROWS_AS(p.apply(Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("category arms fit in the unit ball") {
  SyntheticLogSpec spec;
  spec.users = 10;
  const auto log = generate_log(spec);
  const auto r = ingest_impressions(log.impressions);
  const ArmProjection p = pca_fit(r.article_vectors(), kProjectedDim);
  const Context arms = category_context(p);
  CHECK(arms.num_arms() == kNewsCategories);
  CHECK(arms.dim() == kProjectedDim);
  Matrix raw(kNewsCategories, kProjectedDim);
  for (int c = 0; c < kNewsCategories; ++c) raw.row(c) = p.apply(Vector::Unit(kNewsCategories, c)).transpose();
  const double scale = std::max(1.0, raw.rowwise().norm().maxCoeff());
  CHECK((arms.arms() - raw / scale).norm() < 1e-12);
  CHECK(arms.arms().rowwise().norm().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("queue replay: first in, first out, then stop") {
  QueueBank bank(3);
  bank.push(1, 0, 1);
  bank.push(1, 0, 1);
  bank.push(1, 0, 0);
  bank.push(1, 2, 1);
  FixedArm algo(0);
  const QueueEvalResult r = evaluate(bank, {1}, identity_arms(3), algo, 10);
  CHECK(algo.rewards == std::vector<double>{1, 1, 0});
  CHECK(r.pulls == 3);
  CHECK(r.clicks == 2);
  CHECK(r.users == 1);
  CHECK(r.terminated == 1);
  CHECK(r.ctr() == doctest::Approx(2.0 / 3.0));
  CHECK(bank.queue_size(1, 2) == 1);

  FixedArm again(0);
  const QueueEvalResult none = evaluate(bank, {1}, identity_arms(3), again, 10);
  CHECK(none.pulls == 0);
  CHECK(none.ctr() == 0.0);

  FixedArm capped(2);
  QueueBank full(3);
  for (int i = 0; i < 5; ++i) full.push(7, 2, 1);
  const QueueEvalResult c = evaluate(full, {7}, identity_arms(3), capped, 2);
  CHECK(c.pulls == 2);
  CHECK(c.terminated == 0);
  CHECK(full.queue_size(7, 2) == 3);

  FixedArm mismatch(0);
  CHECK_THROWS_AS(evaluate(full, {7}, identity_arms(4), mismatch, 2), std::invalid_argument);
}

TEST_CASE("pops equal rewards consumed and replay is deterministic") {
  SyntheticLogSpec spec;
  spec.users = 200;
  spec.impressions_per_user = 30;
  const auto log = generate_log(spec);
  const auto ingest = ingest_impressions(log.impressions);
  const Context arms = category_context(pca_fit(ingest.article_vectors()));
  auto run = [&](std::uint64_t seed) {
    QueueBank bank = ingest.bank;
    UniformRandom algo(seed);
    QueueEvalResult r = evaluate(bank, bank.users(), arms, algo, 20, 50);
    CHECK(bank.total_popped() == static_cast<std::size_t>(r.pulls));
    return r;
  };
  const auto a = run(3);
  const auto b = run(3);
  CHECK(a.clicks == b.clicks);
  CHECK(a.pulls == b.pulls);
  CHECK(a.curve == b.curve);
  REQUIRE(a.curve.size() == 4);
  CHECK(a.curve.back().first == 200);
  CHECK(a.curve.back().second == doctest::Approx(a.ctr()));
}

TEST_CASE("synthetic logs") {
  SyntheticLogSpec spec;
  spec.users = 50;
  const auto a = generate_log(spec);
  const auto b = generate_log(spec);
  REQUIRE(a.impressions.size() == b.impressions.size());
  for (std::size_t i = 0; i < a.impressions.size(); ++i) {
    REQUIRE(a.impressions[i].click == b.impressions[i].click);
    REQUIRE(a.impressions[i].categories == b.impressions[i].categories);
  }
  CHECK(a.class_rates.rows() == 10);
  CHECK(a.class_rates.cols() == kNewsCategories);
  // Distinct classes prefer distinct category sets.
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) CHECK((a.class_rates.row(i) - a.class_rates.row(j)).norm() > 0.1);
  // Minor categories are never preferred.
  CHECK(a.class_rates.rightCols(kNewsCategories - spec.major_categories).maxCoeff() == spec.low_rate);
  CHECK(a.user_class.size() == 50);

  SyntheticLogSpec bad = spec;
  bad.major_categories = 30;
  CHECK_THROWS_AS(generate_log(bad), std::invalid_argument);
}
