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

namespace explore::cf {

struct CfConfig {
  std::size_t min_overlap = 3;  // co-rated songs needed for a defined similarity
  std::size_t k = 30;
  bool keep_negative = true;
  // Similarity is shrunk by min(co_rated, cap) / cap; 0 disables shrinkage.
  std::size_t significance_cap = 50;

  bool operator==(const CfConfig&) const = default;
};

struct Neighbor {
  std::uint32_t user = 0;
  double similarity = 0.0;  // Pearson over co-rated songs, in [-1, 1]
  double weight = 0.0;      // similarity after significance shrinkage; ranks and weighs
  std::uint32_t co_rated = 0;

  bool operator==(const Neighbor&) const = default;
};

// Sorted by |weight| descending, ties by ascending user index. Never
// contains the target itself.
struct NeighborSet {
  std::uint32_t target = 0;
  std::vector<Neighbor> neighbors;

  bool operator==(const NeighborSet&) const = default;
};

struct PredictedRating {
  std::uint32_t user = 0;
  std::uint32_t song = 0;
  double value = 0.0;      // clamped to [1, 5]
  double unclamped = 0.0;  // before clamping
  std::uint32_t support = 0;
};

// Centered correlation of two equally long vectors. Returns nullopt when
// either side has zero variance. Throws InsufficientOverlap below
// `min_overlap` entries and LengthMismatch on unequal lengths.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b, std::size_t min_overlap = 3);

struct PairSimilarity {
  std::optional<double> pearson;  // nullopt: undefined or too little overlap
  std::uint32_t co_rated = 0;
};

// Pearson over the songs both users rated.
PairSimilarity user_similarity(const RatingMatrix& matrix, std::size_t u, std::size_t v, std::size_t min_overlap);

double significance_weight(double similarity, std::size_t co_rated, std::size_t cap);

// Top-k neighbours of `user`. Throws UnknownUser or EmptyNeighborhood.
NeighborSet neighbors(const RatingMatrix& matrix, std::size_t user, std::size_t k, const CfConfig& config = {});

// Mean-centred weighted prediction over the neighbours that rated `song`:
//   mean_i + sum w (r_u - mean_u) / sum |w|, clamped to [1, 5].
// Throws NoRatingSupport when no neighbour rated the song.
PredictedRating predict_rating(const RatingMatrix& matrix, std::size_t user, std::size_t song,
                               const NeighborSet& neighbor_set);

// Every song rated by at least one neighbour, best first (ties by song
// index), truncated to n.
std::vector<ScoredSong> recommend_cf(const RatingMatrix& matrix, const NeighborSet& neighbor_set, std::size_t n,
                                     bool exclude_rated);
std::vector<ScoredSong> recommend_cf(const RatingMatrix& matrix, std::size_t user, std::size_t n, bool exclude_rated,
                                     const CfConfig& config = {});

// Neighbour sets for all users; users without a neighbourhood get an empty
// set.
std::vector<NeighborSet> build_neighbor_index(const RatingMatrix& matrix, const CfConfig& config);

}  // namespace explore::cf
