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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "explore/ranking.hpp"
#include "explore/rating_matrix.hpp"

namespace explore::mf {

struct MfConfig {
  std::size_t factors = 32;
  std::size_t epochs = 50;
  double learning_rate = 0.005;
  double regularization = 0.02;
  double init_scale = 0.05;  // factors start ~ Uniform(-init_scale, init_scale)
  std::uint64_t seed = 42;

  bool operator==(const MfConfig&) const = default;
};

// Latent-factor model: prediction = global_mean + p_u . q_i. Factor
// matrices are row-major, one row per user / song.
struct FactorModel {
  std::size_t user_count = 0;
  std::size_t song_count = 0;
  std::size_t dim = 0;
  double global_mean = 0.0;
  std::vector<double> user_factors;
  std::vector<double> item_factors;
  std::vector<double> training_log;  // train RMSE after each epoch

  std::span<const double> user_vector(std::size_t u) const;
  std::span<const double> item_vector(std::size_t i) const;
  std::span<double> user_vector(std::size_t u);
  std::span<double> item_vector(std::size_t i);

  bool operator==(const FactorModel&) const = default;
};

// SGD over observed entries in observation order (user-major, song index),
// one pass per epoch. Throws DivergenceDetected when train RMSE stops being
// finite.
FactorModel train_mf(const RatingMatrix& matrix, const MfConfig& config = {});

// Zero-initialised model sized for `matrix` (global mean set), for callers
// that build factors by hand.
FactorModel empty_model(std::size_t users, std::size_t songs, std::size_t dim, double global_mean);

double raw_prediction(const FactorModel& model, std::size_t user, std::size_t song);

// global_mean + p_u . q_i clamped to [1, 5]. Throws UnknownUser/UnknownSong.
double predict_mf(const FactorModel& model, std::size_t user, std::size_t song);

// p_u . q_i / (|p_u| |q_i|); nullopt when either vector is zero.
std::optional<double> user_song_cosine(const FactorModel& model, std::size_t user, std::size_t song);

enum class MfRanking { kCosine, kPredictedRating };

// All candidate songs ranked by cosine (or predicted rating). A user with an
// all-zero factor vector falls back to predicted-rating ranking.
std::vector<ScoredSong> recommend_mf(const FactorModel& model, const RatingMatrix& matrix, std::size_t user,
                                     std::size_t n, bool exclude_rated, MfRanking ranking = MfRanking::kCosine);

// Sum over observed (u, i) of (r - mu - p.q)^2 + reg (|p_u|^2 + |q_i|^2);
// SGD follows the per-observation gradient of exactly this sum.
double objective(const FactorModel& model, const RatingMatrix& matrix, double regularization);

struct Gradient {
  std::vector<double> user;  // same layout as user_factors
  std::vector<double> item;
};

Gradient objective_gradient(const FactorModel& model, const RatingMatrix& matrix, double regularization);

double train_rmse(const FactorModel& model, const RatingMatrix& matrix);

// Minimizer over p alone (item factors fixed) of the training objective
// restricted to one user: sum_i (r_i - mu - p.q_i)^2 + reg |p|^2 per rating. Gives a new user a factor vector without
// retraining. Throws UnknownSong on an out-of-range song index.
std::vector<double> fold_in_user(const FactorModel& model, std::span<const RatingEntry> row, double regularization);

// Copy of `model` with row `user` set to `factors`; `user == user_count`
// appends a row.
FactorModel with_user_factors(const FactorModel& model, std::size_t user, std::span<const double> factors);

}  // namespace explore::mf
