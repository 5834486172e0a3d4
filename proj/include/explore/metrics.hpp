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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "explore/cf.hpp"
#include "explore/mf.hpp"
#include "explore/rating_matrix.hpp"

namespace explore::metrics {

enum class SplitStrategy { kStratifiedPerUser, kGlobalRandom };

std::string_view strategy_name(SplitStrategy s);  // "stratified" | "global"
std::optional<SplitStrategy> parse_strategy(std::string_view s);

struct SplitSpec {
  SplitStrategy strategy = SplitStrategy::kStratifiedPerUser;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
};

// Both halves keep the full user/song tables of the input, so indices agree.
struct Split {
  RatingMatrix train;
  RatingMatrix test;
};

// Stratified: each user with n >= 2 ratings keeps ceil(f * n) of them in
// train (users with one rating go wholly to train). Global: entry-level
// shuffle, ceil(f * nnz) to train. Synthetic users are left out of both
// halves. Throws InvalidArgument for f outside (0, 1) and EmptyTest when
// the test half is empty.
Split split(const RatingMatrix& matrix, const SplitSpec& spec);

// sqrt(mean((p - a)^2)). Throws LengthMismatch / EmptyInput.
double rmse(std::span<const double> predicted, std::span<const double> actual);

enum class ApNormalizer {
  kRelevantInTopK,  // r_k, relevant items within the top k
  kMinRelevantK,    // min(R, k), the common textbook variant
};

// (1/norm) sum_{pos<=k} P(pos) rel(pos); 0 when the normalizer is 0.
double average_precision_at_k(std::span<const std::uint32_t> ranked, const std::set<std::uint32_t>& relevant,
                              std::size_t k, ApNormalizer normalizer = ApNormalizer::kRelevantInTopK);

// Unweighted mean of per-user AP@k. Throws NoUsers / LengthMismatch.
double map_at_k(const std::vector<std::vector<std::uint32_t>>& rankings,
                const std::vector<std::set<std::uint32_t>>& relevant, std::size_t k,
                ApNormalizer normalizer = ApNormalizer::kRelevantInTopK);

// DCG@k / IDCG@k with log2(i + 1) discounts; IDCG sorts all given gains.
// 0 when IDCG is 0. Throws NegativeGain.
double ndcg_at_k(std::span<const double> gains, std::size_t k);

enum class ModelKind { kCf, kMf, kOracle, kRandom };

std::string_view model_name(ModelKind kind);
std::optional<ModelKind> parse_model(std::string_view s);

inline constexpr double kDefaultRelevanceThreshold = 3.5;

struct EvalConfig {
  cf::CfConfig cf;
  mf::MfConfig mf;
  mf::MfRanking mf_ranking = mf::MfRanking::kCosine;
  ApNormalizer ap_normalizer = ApNormalizer::kRelevantInTopK;
};

struct UserResult {
  std::string user_id;
  std::size_t test_count = 0;
  std::size_t relevant_count = 0;
  double average_precision = 0.0;
  double ndcg = 0.0;
};

struct EvaluationReport {
  ModelKind model = ModelKind::kCf;
  SplitSpec split;
  std::size_t k = 3;
  double relevance_threshold = kDefaultRelevanceThreshold;
  ApNormalizer ap_normalizer = ApNormalizer::kRelevantInTopK;
  std::size_t train_entries = 0;
  std::size_t test_entries = 0;
  double rmse = 0.0;
  std::size_t rmse_fallbacks = 0;  // test entries predicted by the user's train mean
  double map_at_k = 0.0;
  double mean_ndcg = 0.0;
  std::vector<UserResult> per_user;  // users with a non-empty test side
};

// Trains `kind` on the train half, scores test entries (RMSE) and ranks, for
// each user, every song not rated in train. Relevant = test rating >=
// threshold; NDCG gains are test ratings (0 for other candidates).
EvaluationReport evaluate(ModelKind kind, const RatingMatrix& matrix, const SplitSpec& spec, std::size_t k,
                          double relevance_threshold = kDefaultRelevanceThreshold, const EvalConfig& config = {});

}  // namespace explore::metrics
