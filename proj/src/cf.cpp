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

#include "explore/cf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "explore/error.hpp"
#include "explore/ranking.hpp"

namespace explore::cf {
namespace {

void check_user(const RatingMatrix& matrix, std::size_t user) {
  if (user >= matrix.user_count()) {
    throw Error(ErrorCode::kUnknownUser, "user index " + std::to_string(user) + " out of range");
  }
}

bool rank_before(const Neighbor& a, const Neighbor& b) {
  const auto wa = ranking_key(std::abs(a.weight));
  const auto wb = ranking_key(std::abs(b.weight));
  if (wa != wb) return wa > wb;
  return a.user < b.user;
}

}  // namespace

std::optional<double> pearson(std::span<const double> a, std::span<const double> b, std::size_t min_overlap) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "pearson: vectors differ in length");
  if (a.size() < std::max<std::size_t>(min_overlap, 1)) {
    throw Error(ErrorCode::kInsufficientOverlap, "pearson: " + std::to_string(a.size()) + " co-rated songs, need " +
                                                     std::to_string(min_overlap));
  }
  const auto [a_lo, a_hi] = std::minmax_element(a.begin(), a.end());
  const auto [b_lo, b_hi] = std::minmax_element(b.begin(), b.end());
  if (*a_lo == *a_hi || *b_lo == *b_hi) return std::nullopt;
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a <= 0.0 || var_b <= 0.0) return std::nullopt;
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

PairSimilarity user_similarity(const RatingMatrix& matrix, std::size_t u, std::size_t v, std::size_t min_overlap) {
  const auto ru = matrix.row(u);
  const auto rv = matrix.row(v);
  std::vector<double> a, b;
  std::size_t i = 0, j = 0;
  while (i < ru.size() && j < rv.size()) {
    if (ru[i].song < rv[j].song) {
      ++i;
    } else if (rv[j].song < ru[i].song) {
      ++j;
    } else {
      a.push_back(ru[i].rating);
      b.push_back(rv[j].rating);
      ++i;
      ++j;
    }
  }
  PairSimilarity out;
  out.co_rated = static_cast<std::uint32_t>(a.size());
  if (a.empty() || a.size() < min_overlap) return out;
  out.pearson = pearson(a, b, min_overlap);
  return out;
}

double significance_weight(double similarity, std::size_t co_rated, std::size_t cap) {
  if (cap == 0) return similarity;
  return similarity * static_cast<double>(std::min(co_rated, cap)) / static_cast<double>(cap);
}

NeighborSet neighbors(const RatingMatrix& matrix, std::size_t user, std::size_t k, const CfConfig& config) {
  check_user(matrix, user);
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");

  NeighborSet set;
  set.target = static_cast<std::uint32_t>(user);
  for (std::size_t v = 0; v < matrix.user_count(); ++v) {
    if (v == user) continue;
    const auto sim = user_similarity(matrix, user, v, config.min_overlap);
    if (!sim.pearson) continue;
    if (ranking_key(std::abs(*sim.pearson)) == 0) continue;
    if (!config.keep_negative && *sim.pearson < 0.0) continue;
    set.neighbors.push_back({static_cast<std::uint32_t>(v), *sim.pearson,
                             significance_weight(*sim.pearson, sim.co_rated, config.significance_cap), sim.co_rated});
  }
  if (set.neighbors.empty()) {
    throw Error(ErrorCode::kEmptyNeighborhood, "no user shares " + std::to_string(config.min_overlap) +
                                                   " co-rated songs with '" + matrix.user_id(user) + "'");
  }
  std::sort(set.neighbors.begin(), set.neighbors.end(), rank_before);
  if (set.neighbors.size() > k) set.neighbors.resize(k);
  return set;
}

PredictedRating predict_rating(const RatingMatrix& matrix, std::size_t user, std::size_t song,
                               const NeighborSet& neighbor_set) {
  check_user(matrix, user);
  if (song >= matrix.song_count()) throw Error(ErrorCode::kUnknownSong, "song index out of range");

  double numerator = 0.0;
  double denominator = 0.0;
  std::uint32_t support = 0;
  for (const auto& n : neighbor_set.neighbors) {
    const auto r = matrix.rating(n.user, song);
    if (!r) continue;
    numerator += n.weight * (*r - matrix.user_mean(n.user));
    denominator += std::abs(n.weight);
    ++support;
  }
  if (support == 0 || denominator == 0.0) {
    throw Error(ErrorCode::kNoRatingSupport, "no neighbour of '" + matrix.user_id(user) + "' rated '" +
                                                 matrix.song_id(song) + "'");
  }
  PredictedRating p;
  p.user = static_cast<std::uint32_t>(user);
  p.song = static_cast<std::uint32_t>(song);
  p.unclamped = matrix.user_mean(user) + numerator / denominator;
  p.value = std::clamp(p.unclamped, kMinRating, kMaxRating);
  p.support = support;
  return p;
}

std::vector<ScoredSong> recommend_cf(const RatingMatrix& matrix, const NeighborSet& neighbor_set, std::size_t n,
                                     bool exclude_rated) {
  const std::size_t user = neighbor_set.target;
  check_user(matrix, user);
  std::vector<bool> candidate(matrix.song_count(), false);
  for (const auto& nb : neighbor_set.neighbors) {
    for (const auto& e : matrix.row(nb.user)) candidate[e.song] = true;
  }
  if (exclude_rated) {
    for (const auto& e : matrix.row(user)) candidate[e.song] = false;
  }
  std::vector<ScoredSong> out;
  for (std::uint32_t s = 0; s < candidate.size(); ++s) {
    if (!candidate[s]) continue;
    out.push_back({s, predict_rating(matrix, user, s, neighbor_set).value});
  }
  std::sort(out.begin(), out.end(), score_order);
  if (out.size() > n) out.resize(n);
  return out;
}

std::vector<ScoredSong> recommend_cf(const RatingMatrix& matrix, std::size_t user, std::size_t n, bool exclude_rated,
                                     const CfConfig& config) {
  return recommend_cf(matrix, neighbors(matrix, user, config.k, config), n, exclude_rated);
}

std::vector<NeighborSet> build_neighbor_index(const RatingMatrix& matrix, const CfConfig& config) {
  std::vector<NeighborSet> index(matrix.user_count());
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    try {
      index[u] = neighbors(matrix, u, config.k, config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyNeighborhood) throw;
      index[u].target = static_cast<std::uint32_t>(u);
    }
  }
  return index;
}

}  // namespace explore::cf
