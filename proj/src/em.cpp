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

#include "lcb/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lcb/random.hpp"

namespace lcb {

namespace {

struct Stacked {
  Matrix x;
  Vector r;
  std::vector<Eigen::Index> user_begin;  // offsets, with a trailing end marker
};

Stacked stack(const std::vector<UserData>& data) {
  Stacked s;
  const Eigen::Index n = static_cast<Eigen::Index>(total_pairs(data));
  const Eigen::Index d = data.front().features.cols();
  s.x.resize(n, d);
  s.r.resize(n);
  Eigen::Index at = 0;
  for (const auto& u : data) {
    if (u.features.cols() != d) throw std::invalid_argument("em_fit: dimension mismatch");
    s.user_begin.push_back(at);
    s.x.middleRows(at, u.size()) = u.features;
    s.r.segment(at, u.size()) = u.rewards;
    at += u.size();
  }
  s.user_begin.push_back(at);
  return s;
}

Vector ridge_fit(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& r, double ridge) {
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += ridge;
  return gram.ldlt().solve(x.transpose() * r);
}

// k-means++ seeding followed by Lloyd iterations on the rows of `points`.
std::vector<int> kmeans(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
  Vector dist = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    std::size_t pick;
    if (dist.sum() > 0.0) {
      pick = sample_categorical(rng, std::span<const double>(dist.data(), static_cast<std::size_t>(n)));
    } else {
      pick = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
    }
    centers.row(c) = points.row(static_cast<Eigen::Index>(pick));
    dist = dist.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (label[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        label[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(label[static_cast<std::size_t>(i)]) += points.row(i);
      counts[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
    if (!changed && iter > 0) break;
  }
  return label;
}

struct Params {
  Vector pi;
  Matrix beta;  // components x d
  Vector sigma2;
};

}  // namespace

double mixture_log_likelihood(const MixtureModel& model, const std::vector<UserData>& data) {
  double ll = 0.0;
  std::vector<double> terms(model.size());
  for (const auto& u : data) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      for (std::size_t h = 0; h < model.size(); ++h) {
        const auto& c = model[h];
        const double resid = u.rewards(i) - u.features.row(i).dot(c.beta);
        terms[h] = std::log(c.pi) - 0.5 * std::log(2.0 * std::numbers::pi * c.sigma2) -
                   resid * resid / (2.0 * c.sigma2);
      }
      ll += log_sum_exp(terms);
    }
  }
  return ll;
}

EmResult em_fit(const std::vector<UserData>& data, int components, std::uint64_t seed, const EmOptions& options) {
  if (components < 1) throw std::invalid_argument("em_fit: need at least one component");
  if (data.empty() || total_pairs(data) == 0) throw std::invalid_argument("em_fit: no training data");
  const Stacked s = stack(data);
  const Eigen::Index n = s.r.size();
  const Eigen::Index d = s.x.cols();
  const int k = components;
  Rng rng(seed);

  const double global_var = std::max((s.r.array() - s.r.mean()).square().mean(), options.min_variance);

  // Initial hard assignment of users.
  Matrix user_beta(static_cast<Eigen::Index>(data.size()), d);
  for (std::size_t u = 0; u < data.size(); ++u) {
    user_beta.row(static_cast<Eigen::Index>(u)) = ridge_fit(data[u].features, data[u].rewards, 1.0).transpose();
  }
  const int kk = std::min<int>(k, static_cast<int>(data.size()));
  const std::vector<int> user_label = kmeans(user_beta, kk, rng);

  Matrix resp = Matrix::Zero(n, k);
  for (std::size_t u = 0; u < data.size(); ++u) {
    for (Eigen::Index i = s.user_begin[u]; i < s.user_begin[u + 1]; ++i) resp(i, user_label[u]) = 1.0;
  }
  // Components without a seed user start from a random record's user.
  for (int h = kk; h < k; ++h) {
    const auto u = static_cast<std::size_t>(rng() % data.size());
    for (Eigen::Index i = s.user_begin[u]; i < s.user_begin[u + 1]; ++i) {
      resp.row(i).setZero();
      resp(i, h) = 1.0;
    }
  }

  Params p{Vector::Constant(k, 1.0 / k), Matrix::Zero(k, d), Vector::Constant(k, global_var)};
  EmResult result;

  auto m_step = [&]() {
    for (int h = 0; h < k; ++h) {
      double mass = resp.col(h).sum();
      if (mass < options.collapse_mass) {
        const auto u = static_cast<std::size_t>(rng() % data.size());
        resp.col(h).setZero();
        for (Eigen::Index i = s.user_begin[u]; i < s.user_begin[u + 1]; ++i) resp(i, h) = 1.0;
        mass = resp.col(h).sum();
        ++result.reseeds;
      }
      const Vector w = resp.col(h);
      Matrix gram = s.x.transpose() * w.asDiagonal() * s.x;
      gram.diagonal().array() += options.ridge;
      const Vector b = gram.ldlt().solve(s.x.transpose() * w.cwiseProduct(s.r));
      const Vector resid = s.r - s.x * b;
      const double sse = w.dot(resid.cwiseProduct(resid)) + options.ridge * b.squaredNorm();
      p.beta.row(h) = b.transpose();
      p.sigma2(h) = std::max(sse / mass, options.min_variance);
      p.pi(h) = mass;
    }
    p.pi /= p.pi.sum();
  };

  auto e_step = [&]() {
    double ll = 0.0;
    Vector terms(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int h = 0; h < k; ++h) {
        const double resid = s.r(i) - s.x.row(i).dot(p.beta.row(h));
        terms(h) = std::log(p.pi(h)) - 0.5 * std::log(2.0 * std::numbers::pi * p.sigma2(h)) -
                   resid * resid / (2.0 * p.sigma2(h));
      }
      const double lse = log_sum_exp(std::span<const double>(terms.data(), static_cast<std::size_t>(k)));
      resp.row(i) = (terms.array() - lse).exp().matrix().transpose();
      ll += lse;
    }
    for (int h = 0; h < k; ++h) ll -= 0.5 * options.ridge * p.beta.row(h).squaredNorm() / p.sigma2(h);
    return ll;
  };

  m_step();
  for (int iter = 0; iter < std::max(1, options.iterations); ++iter) {
    const double obj = e_step();
    result.objective.push_back(obj);
    result.iterations = iter + 1;
    if (iter > 0) {
      const double prev = result.objective[result.objective.size() - 2];
      if (obj - prev < options.tolerance * (1.0 + std::abs(obj))) break;
    }
    m_step();
  }

  std::vector<MixtureComponent> comps;
  for (int h = 0; h < k; ++h) comps.push_back(MixtureComponent{p.pi(h), p.beta.row(h).transpose(), p.sigma2(h)});
  double total = 0.0;
  for (const auto& c : comps) total += c.pi;
  for (auto& c : comps) c.pi /= total;
  result.model = MixtureModel(std::move(comps));
  return result;
}

}  // namespace lcb
