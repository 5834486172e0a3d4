/* Copyright 2026 The Explore Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "explore/mf.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "explore/error.hpp"

namespace explore::mf {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Gradient of (r - mu - p.q)^2 + reg(|p|^2 + |q|^2) w.r.t. p and q.
void observation_gradient(std::span<const double> p, std::span<const double> q, double err, double reg,
                          std::span<double> grad_p, std::span<double> grad_q) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    grad_p[k] = -2.0 * err * q[k] + 2.0 * reg * p[k];
    grad_q[k] = -2.0 * err * p[k] + 2.0 * reg * q[k];
  }
}

void check_indices(const FactorModel& model, std::size_t user, std::size_t song) {
  if (user >= model.user_count) throw Error(ErrorCode::kUnknownUser, "user index out of range for factor model");
  if (song >= model.song_count) throw Error(ErrorCode::kUnknownSong, "song index out of range for factor model");
}

}  // namespace

std::span<const double> FactorModel::user_vector(std::size_t u) const {
  return std::span<const double>(user_factors).subspan(u * dim, dim);
}
std::span<const double> FactorModel::item_vector(std::size_t i) const {
  return std::span<const double>(item_factors).subspan(i * dim, dim);
}
std::span<double> FactorModel::user_vector(std::size_t u) { return std::span<double>(user_factors).subspan(u * dim, dim); }
std::span<double> FactorModel::item_vector(std::size_t i) { return std::span<double>(item_factors).subspan(i * dim, dim); }

FactorModel empty_model(std::size_t users, std::size_t songs, std::size_t dim, double global_mean) {
  FactorModel m;
  m.user_count = users;
  m.song_count = songs;
  m.dim = dim;
  m.global_mean = global_mean;
  m.user_factors.assign(users * dim, 0.0);
  m.item_factors.assign(songs * dim, 0.0);
  return m;
}

double raw_prediction(const FactorModel& model, std::size_t user, std::size_t song) {
  return model.global_mean + dot(model.user_vector(user), model.item_vector(song));
}

double train_rmse(const FactorModel& model, const RatingMatrix& matrix) {
  double sse = 0.0;
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    for (const auto& e : matrix.row(u)) {
      const double err = static_cast<double>(e.rating) - raw_prediction(model, u, e.song);
      sse += err * err;
    }
  }
  return matrix.nnz() ? std::sqrt(sse / static_cast<double>(matrix.nnz())) : 0.0;
}

FactorModel train_mf(const RatingMatrix& matrix, const MfConfig& config) {
  if (matrix.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot factorise an empty matrix");
  if (config.factors == 0 || config.epochs == 0 || !(config.learning_rate > 0.0) ||
      !(config.regularization >= 0.0) || !(config.init_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "MF hyperparameters must be positive");
  }

  double sum = 0.0;
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    for (const auto& e : matrix.row(u)) sum += e.rating;
  }
  auto model = empty_model(matrix.user_count(), matrix.song_count(), config.factors,
                           sum / static_cast<double>(matrix.nnz()));

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-config.init_scale, config.init_scale);
  for (auto& x : model.user_factors) x = init(rng);
  for (auto& x : model.item_factors) x = init(rng);

  const double half_lr = config.learning_rate / 2.0;
  std::vector<double> gp(config.factors), gq(config.factors);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t u = 0; u < matrix.user_count(); ++u) {
      auto p = model.user_vector(u);
      for (const auto& e : matrix.row(u)) {
        auto q = model.item_vector(e.song);
        const double err = static_cast<double>(e.rating) - model.global_mean - dot(p, q);
        observation_gradient(p, q, err, config.regularization, gp, gq);
        for (std::size_t k = 0; k < config.factors; ++k) {
          p[k] -= half_lr * gp[k];
          q[k] -= half_lr * gq[k];
        }
      }
    }
    const double rmse = train_rmse(model, matrix);
    if (!std::isfinite(rmse)) {
      std::ostringstream msg;
      msg << "train RMSE became non-finite at epoch " << epoch + 1 << " (learning_rate=" << config.learning_rate
          << ", regularization=" << config.regularization << ")";
      throw Error(ErrorCode::kDivergenceDetected, msg.str());
    }
    model.training_log.push_back(rmse);
  }
  return model;
}

double predict_mf(const FactorModel& model, std::size_t user, std::size_t song) {
  check_indices(model, user, song);
  return std::clamp(raw_prediction(model, user, song), kMinRating, kMaxRating);
}

std::optional<double> user_song_cosine(const FactorModel& model, std::size_t user, std::size_t song) {
  check_indices(model, user, song);
  const auto p = model.user_vector(user);
  const auto q = model.item_vector(song);
  const double np = std::sqrt(dot(p, p));
  const double nq = std::sqrt(dot(q, q));
  if (np == 0.0 || nq == 0.0) return std::nullopt;
  return std::clamp(dot(p, q) / (np * nq), -1.0, 1.0);
}

std::vector<ScoredSong> recommend_mf(const FactorModel& model, const RatingMatrix& matrix, std::size_t user,
                                     std::size_t n, bool exclude_rated, MfRanking ranking) {
  if (user >= model.user_count || user >= matrix.user_count()) {
    throw Error(ErrorCode::kUnknownUser, "user index out of range for factor model");
  }
  const auto p = model.user_vector(user);
  if (ranking == MfRanking::kCosine && dot(p, p) == 0.0) ranking = MfRanking::kPredictedRating;

  std::vector<bool> rated(model.song_count, false);
  if (exclude_rated) {
    for (const auto& e : matrix.row(user)) rated[e.song] = true;
  }
  std::vector<ScoredSong> out;
  for (std::uint32_t s = 0; s < model.song_count; ++s) {
    if (rated[s]) continue;
    double score = 0.0;
    if (ranking == MfRanking::kCosine) {
      // Zero item vectors have no direction; rank them with the least similar.
      score = user_song_cosine(model, user, s).value_or(-1.0);
    } else {
      score = predict_mf(model, user, s);
    }
    out.push_back({s, score});
  }
  std::sort(out.begin(), out.end(), score_order);
  if (out.size() > n) out.resize(n);
  return out;
}

double objective(const FactorModel& model, const RatingMatrix& matrix, double regularization) {
  double total = 0.0;
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    const auto p = model.user_vector(u);
    for (const auto& e : matrix.row(u)) {
      const auto q = model.item_vector(e.song);
      const double err = static_cast<double>(e.rating) - model.global_mean - dot(p, q);
      total += err * err + regularization * (dot(p, p) + dot(q, q));
    }
  }
  return total;
}

Gradient objective_gradient(const FactorModel& model, const RatingMatrix& matrix, double regularization) {
  Gradient g;
  g.user.assign(model.user_factors.size(), 0.0);
  g.item.assign(model.item_factors.size(), 0.0);
  std::vector<double> gp(model.dim), gq(model.dim);
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    const auto p = model.user_vector(u);
    for (const auto& e : matrix.row(u)) {
      const auto q = model.item_vector(e.song);
      const double err = static_cast<double>(e.rating) - model.global_mean - dot(p, q);
      observation_gradient(p, q, err, regularization, gp, gq);
      for (std::size_t k = 0; k < model.dim; ++k) {
        g.user[u * model.dim + k] += gp[k];
        g.item[e.song * model.dim + k] += gq[k];
      }
    }
  }
  return g;
}

std::vector<double> fold_in_user(const FactorModel& model, std::span<const RatingEntry> row, double regularization) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (const auto& e : row) {
    if (e.song >= model.song_count) throw Error(ErrorCode::kUnknownSong, "song index out of range");
    const auto q = model.item_vector(e.song);
    const Eigen::Map<const Eigen::VectorXd> qv(q.data(), d);
    a.noalias() += qv * qv.transpose();
    b += (static_cast<double>(e.rating) - model.global_mean) * qv;
  }
  a.diagonal().array() += regularization * static_cast<double>(row.size());
  std::vector<double> p(model.dim, 0.0);
  if (row.empty() || d == 0) return p;
  Eigen::Map<Eigen::VectorXd>(p.data(), d) = a.ldlt().solve(b);
  return p;
}

FactorModel with_user_factors(const FactorModel& model, std::size_t user, std::span<const double> factors) {
  if (factors.size() != model.dim) throw Error(ErrorCode::kLengthMismatch, "factor vector has the wrong dimension");
  if (user > model.user_count) throw Error(ErrorCode::kUnknownUser, "user index out of range");
  FactorModel out = model;
  if (user == model.user_count) {
    out.user_factors.insert(out.user_factors.end(), factors.begin(), factors.end());
    ++out.user_count;
  } else {
    std::copy(factors.begin(), factors.end(), out.user_vector(user).begin());
  }
  return out;
}

}  // namespace explore::mf
