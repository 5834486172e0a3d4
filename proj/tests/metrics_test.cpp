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

#include "explore/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "explore/error.hpp"
#include "oracles/low_rank.hpp"
#include "oracles/metric_oracle.hpp"
#include "oracles/random_matrix.hpp"

namespace explore::metrics {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an explore::Error";
  return ErrorCode::kUnavailable;
}

TEST(Rmse, Examples) {
  const std::vector<double> a = {1.5, 2.0, 4.5};
  EXPECT_EQ(rmse(a, a), 0.0);
  EXPECT_NEAR(rmse(std::vector<double>{1, 3}, std::vector<double>{2, 5}), 1.5811388300841898, 1e-12);
  EXPECT_DOUBLE_EQ(rmse(std::vector<double>{4}, std::vector<double>{2}), 2.0);
  EXPECT_EQ(code_of([] { rmse(std::vector<double>{1}, std::vector<double>{1, 2}); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([] { rmse(std::vector<double>{}, std::vector<double>{}); }), ErrorCode::kEmptyInput);
}

TEST(Rmse, ConstantMeanPredictorGivesStdDev) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r(1.0, 5.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> actual(2 + t % 20);
    for (auto& x : actual) x = r(rng);
    double mean = 0.0;
    for (double x : actual) mean += x;
    mean /= static_cast<double>(actual.size());
    double var = 0.0;
    for (double x : actual) var += (x - mean) * (x - mean);
    const std::vector<double> predicted(actual.size(), mean);
    EXPECT_NEAR(rmse(predicted, actual), std::sqrt(var / static_cast<double>(actual.size())), 1e-12);
  }
}

TEST(AveragePrecision, Examples) {
  const std::vector<std::uint32_t> ranked = {1, 2, 3};
  EXPECT_NEAR(average_precision_at_k(ranked, {1, 3}, 3), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(average_precision_at_k(ranked, {1, 2, 3}, 3), 1.0);
  EXPECT_EQ(average_precision_at_k(ranked, {7}, 3), 0.0);
  EXPECT_EQ(code_of([&] { average_precision_at_k(ranked, {1}, 0); }), ErrorCode::kInvalidArgument);
}

TEST(AveragePrecision, NormalizerVariants) {
  // Relevant {1, 9}: 9 never retrieved. r_k = 1, min(R, k) = 2.
  const std::vector<std::uint32_t> ranked = {1, 2, 3};
  EXPECT_DOUBLE_EQ(average_precision_at_k(ranked, {1, 9}, 3, ApNormalizer::kRelevantInTopK), 1.0);
  EXPECT_DOUBLE_EQ(average_precision_at_k(ranked, {1, 9}, 3, ApNormalizer::kMinRelevantK), 0.5);
}

TEST(MapAtK, Examples) {
  const std::vector<std::vector<std::uint32_t>> rankings = {{1, 2}, {3, 4}};
  const std::vector<std::set<std::uint32_t>> rel = {{1, 2}, {4}};
  EXPECT_DOUBLE_EQ(map_at_k(rankings, rel, 2), 0.75);
  EXPECT_DOUBLE_EQ(map_at_k({{3, 4}}, {{4}}, 2), 0.5);
  EXPECT_EQ(code_of([] { map_at_k({}, {}, 3); }), ErrorCode::kNoUsers);
  EXPECT_EQ(code_of([&] { map_at_k(rankings, {{1}}, 3); }), ErrorCode::kLengthMismatch);
}

TEST(Ndcg, Examples) {
  EXPECT_DOUBLE_EQ(ndcg_at_k(std::vector<double>{5, 4, 2, 1}, 3), 1.0);
  EXPECT_NEAR(ndcg_at_k(std::vector<double>{0, 1}, 2), 0.6309297535714575, 1e-15);
  EXPECT_EQ(ndcg_at_k(std::vector<double>{0, 0, 0}, 2), 0.0);
  EXPECT_EQ(code_of([] { ndcg_at_k(std::vector<double>{1, -1}, 2); }), ErrorCode::kNegativeGain);
}

TEST(Ndcg, ScaleInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> g(0.0, 5.0), c(0.1, 10.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> gains(1 + t % 10);
    for (auto& x : gains) x = g(rng);
    auto scaled = gains;
    const double a = c(rng);
    for (auto& x : scaled) x *= a;
    EXPECT_NEAR(ndcg_at_k(gains, 3), ndcg_at_k(scaled, 3), 1e-12);
  }
}

// 1000 random instances with at most 10 items: exact equality with the
// from-definition evaluators.
TEST(MetricOracles, ApAndNdcgMatchBruteForceExactly) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(0, 10), kk(1, 12), half(0, 10);
  std::bernoulli_distribution coin(0.4);
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<std::uint32_t> ranked(n);
    std::iota(ranked.begin(), ranked.end(), 0U);
    std::shuffle(ranked.begin(), ranked.end(), rng);
    std::set<std::uint32_t> relevant;
    for (std::uint32_t s = 0; s < 14; ++s) {
      if (coin(rng)) relevant.insert(s);
    }
    const auto k = static_cast<std::size_t>(kk(rng));
    EXPECT_EQ(average_precision_at_k(ranked, relevant, k), oracle::brute_ap(ranked, relevant, k, false));
    EXPECT_EQ(average_precision_at_k(ranked, relevant, k, ApNormalizer::kMinRelevantK),
              oracle::brute_ap(ranked, relevant, k, true));

    std::vector<double> gains(n);
    for (auto& x : gains) x = half(rng) / 2.0;
    const double got = ndcg_at_k(gains, k);
    EXPECT_EQ(got, oracle::brute_ndcg(gains, k));
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0);
  }
}

TEST(Split, StratifiedCounts) {
  RatingMatrix m({"five", "one", "two"}, {"a", "b", "c", "d", "e"},
                 {{{0, 1.0F}, {1, 2.0F}, {2, 3.0F}, {3, 4.0F}, {4, 5.0F}}, {{2, 3.0F}}, {{0, 4.0F}, {1, 2.0F}}});
  const auto s = split(m, {.strategy = SplitStrategy::kStratifiedPerUser, .seed = 7});
  EXPECT_EQ(s.train.row(0).size(), 4U);
  EXPECT_EQ(s.test.row(0).size(), 1U);
  EXPECT_EQ(s.train.row(1).size(), 1U);
  EXPECT_EQ(s.test.row(1).size(), 0U);
  EXPECT_EQ(s.train.row(2).size(), 2U);  // ceil(1.6) = 2
}

void expect_partition(const RatingMatrix& m, const Split& s) {
  for (std::size_t u = 0; u < m.user_count(); ++u) {
    RatingRow merged(s.train.row(u).begin(), s.train.row(u).end());
    merged.insert(merged.end(), s.test.row(u).begin(), s.test.row(u).end());
    std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.song < b.song; });
    if (m.is_synthetic(u)) {
      EXPECT_TRUE(merged.empty());
      continue;
    }
    const auto row = m.row(u);
    EXPECT_EQ(merged, RatingRow(row.begin(), row.end()));  // union = whole; duplicates would break equality
  }
}

TEST(Split, PartitionAndDeterminism) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto m = oracle::random_matrix(rng, 3, 15, 5, 20, 0.5);
    for (auto strategy : {SplitStrategy::kStratifiedPerUser, SplitStrategy::kGlobalRandom}) {
      const SplitSpec spec{.strategy = strategy, .seed = static_cast<std::uint64_t>(t)};
      try {
        const auto a = split(m, spec);
        const auto b = split(m, spec);
        EXPECT_EQ(a.train, b.train);
        EXPECT_EQ(a.test, b.test);
        expect_partition(m, a);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kEmptyTest);
      }
    }
  }
}

TEST(Split, SyntheticUsersExcluded) {
  RatingMatrix m({"real", "syn"}, {"a", "b", "c", "d", "e"},
                 {{{0, 1.0F}, {1, 2.0F}, {2, 3.0F}, {3, 4.0F}, {4, 5.0F}}, {{0, 5.0F}, {1, 5.0F}, {2, 5.0F}}},
                 {false, true});
  for (auto strategy : {SplitStrategy::kStratifiedPerUser, SplitStrategy::kGlobalRandom}) {
    const auto s = split(m, {.strategy = strategy});
    EXPECT_TRUE(s.train.row(1).empty());
    EXPECT_TRUE(s.test.row(1).empty());
  }
}

TEST(Split, EmptyTestAndBadFraction) {
  RatingMatrix m({"a", "b"}, {"x", "y"}, {{{0, 1.0F}}, {{0, 3.0F}, {1, 2.0F}}});
  EXPECT_EQ(code_of([&] { split(m, {}); }), ErrorCode::kEmptyTest);
  EXPECT_EQ(code_of([&] { split(m, {.train_fraction = 1.0}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { split(m, {.train_fraction = 0.0}); }), ErrorCode::kInvalidArgument);
}

TEST(Evaluate, OracleIsPerfect) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto m = oracle::random_matrix(rng, 10, 20, 10, 30, 0.5);
    const auto r = evaluate(ModelKind::kOracle, m, {.seed = static_cast<std::uint64_t>(t)}, 3);
    EXPECT_EQ(r.rmse, 0.0);
    EXPECT_DOUBLE_EQ(r.mean_ndcg, 1.0);
    for (const auto& u : r.per_user) {
      if (u.relevant_count > 0) EXPECT_DOUBLE_EQ(u.average_precision, 1.0);
    }
  }
}

TEST(Evaluate, MetricsInRangeForEveryModel) {
  const auto m = oracle::low_rank_matrix(6, 30, 40, 2, 0.5);
  EvalConfig config;
  config.mf.factors = 4;
  config.mf.epochs = 20;
  for (auto kind : {ModelKind::kCf, ModelKind::kMf, ModelKind::kOracle, ModelKind::kRandom}) {
    const auto r = evaluate(kind, m, {.seed = 3}, 3, kDefaultRelevanceThreshold, config);
    EXPECT_GE(r.rmse, 0.0);
    EXPECT_LE(r.rmse, 4.0);
    EXPECT_GE(r.map_at_k, 0.0);
    EXPECT_LE(r.map_at_k, 1.0);
    EXPECT_GE(r.mean_ndcg, 0.0);
    EXPECT_LE(r.mean_ndcg, 1.0);
    EXPECT_EQ(r.train_entries + r.test_entries, m.nnz());
    EXPECT_FALSE(r.per_user.empty());
  }
}

TEST(Evaluate, DeterministicUnderSeed) {
  const auto m = oracle::low_rank_matrix(7, 25, 30, 2, 0.5);
  for (auto kind : {ModelKind::kCf, ModelKind::kRandom}) {
    const auto a = evaluate(kind, m, {.seed = 9}, 3);
    const auto b = evaluate(kind, m, {.seed = 9}, 3);
    EXPECT_EQ(a.rmse, b.rmse);
    EXPECT_EQ(a.map_at_k, b.map_at_k);
    EXPECT_EQ(a.mean_ndcg, b.mean_ndcg);
  }
}

// Two taste groups; every user has 5 ratings so the stratified split leaves
// exactly one test entry each.
TEST(Evaluate, CfOnStructuredData) {
  // Users 0-1 like songs 0-2, users 2-3 like songs 3-5.
  std::vector<RatingRow> rows = {
      {{0, 5.0F}, {1, 5.0F}, {2, 4.5F}, {3, 1.0F}, {4, 1.5F}},
      {{0, 4.5F}, {1, 5.0F}, {2, 5.0F}, {4, 1.0F}, {5, 1.0F}},
      {{0, 1.0F}, {1, 1.5F}, {3, 5.0F}, {4, 4.5F}, {5, 5.0F}},
      {{1, 1.0F}, {2, 1.0F}, {3, 4.5F}, {4, 5.0F}, {5, 5.0F}},
  };
  RatingMatrix m({"a", "b", "c", "d"}, {"s0", "s1", "s2", "s3", "s4", "s5"}, rows);
  const auto r = evaluate(ModelKind::kCf, m, {.seed = 1}, 3, 3.5, {.cf = {.min_overlap = 2}});
  EXPECT_EQ(r.test_entries, 4U);
  EXPECT_EQ(r.per_user.size(), 4U);
  const auto random = evaluate(ModelKind::kRandom, m, {.seed = 1}, 3, 3.5);
  EXPECT_EQ(random.test_entries, 4U);
}

TEST(Names, RoundTrip) {
  for (auto k : {ModelKind::kCf, ModelKind::kMf, ModelKind::kOracle, ModelKind::kRandom}) {
    EXPECT_EQ(parse_model(model_name(k)), k);
  }
  EXPECT_FALSE(parse_model("svd").has_value());
  EXPECT_EQ(parse_strategy("global"), SplitStrategy::kGlobalRandom);
  EXPECT_EQ(parse_strategy("stratified"), SplitStrategy::kStratifiedPerUser);
}

}  // namespace
}  // namespace explore::metrics
