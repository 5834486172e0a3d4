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

#include <gtest/gtest.h>

#include <random>

#include "explore/error.hpp"
#include "oracles/cf_oracle.hpp"
#include "oracles/random_matrix.hpp"

namespace explore::cf {
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

TEST(Pearson, Examples) {
  const std::vector<double> a = {1, 2, 3};
  EXPECT_NEAR(*pearson(a, std::vector<double>{2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(*pearson(a, std::vector<double>{3, 2, 1}), -1.0, 1e-12);
  EXPECT_NEAR(*pearson(std::vector<double>{5, 3, 4}, std::vector<double>{4, 1, 5}), 0.720576692122892, 1e-12);
}

TEST(Pearson, UndefinedAndInsufficient) {
  EXPECT_FALSE(pearson(std::vector<double>{3, 3, 3}, std::vector<double>{1, 2, 3}).has_value());
  EXPECT_FALSE(pearson(std::vector<double>{3.7, 3.7, 3.7}, std::vector<double>{1, 2, 3}).has_value());
  EXPECT_EQ(code_of([] { pearson(std::vector<double>{1, 2}, std::vector<double>{2, 1}); }),
            ErrorCode::kInsufficientOverlap);
  EXPECT_EQ(code_of([] { pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 1}); }),
            ErrorCode::kLengthMismatch);
}

TEST(Pearson, SymmetricAndAffineInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r(1.0, 5.0), alpha(0.1, 10.0), beta(-5.0, 5.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(6), b(6), c(6);
    for (auto& x : a) x = r(rng);
    for (auto& x : b) x = r(rng);
    const double al = alpha(rng), be = beta(rng);
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = al * a[i] + be;
    EXPECT_EQ(*pearson(a, b), *pearson(b, a));
    EXPECT_NEAR(*pearson(a, c), 1.0, 1e-9);
  }
}

TEST(Neighbors, IdenticalRowsGiveSimilarityOne) {
  RatingMatrix m({"a", "b"}, {"s1", "s2", "s3"}, {{{0, 1.0F}, {1, 3.0F}, {2, 5.0F}}, {{0, 1.0F}, {1, 3.0F}, {2, 5.0F}}});
  auto set = neighbors(m, 0, 5);
  ASSERT_EQ(set.neighbors.size(), 1U);
  EXPECT_EQ(set.neighbors[0].user, 1U);
  EXPECT_DOUBLE_EQ(set.neighbors[0].similarity, 1.0);
  EXPECT_EQ(set.neighbors[0].co_rated, 3U);
  // Significance shrinkage: 3 co-rated of a 50 cap.
  EXPECT_DOUBLE_EQ(set.neighbors[0].weight, 3.0 / 50.0);
}

TEST(Neighbors, IsolatedUserHasEmptyNeighborhood) {
  RatingMatrix m({"a", "b"}, {"s1", "s2", "s3", "s4"}, {{{0, 1.0F}, {1, 3.0F}}, {{2, 1.0F}, {3, 5.0F}}});
  EXPECT_EQ(code_of([&] { neighbors(m, 0, 5); }), ErrorCode::kEmptyNeighborhood);
  EXPECT_EQ(code_of([&] { neighbors(m, 7, 5); }), ErrorCode::kUnknownUser);
}

TEST(Neighbors, DropNegativesSwitch) {
  RatingMatrix m({"a", "b", "c"}, {"s1", "s2", "s3"},
                 {{{0, 1.0F}, {1, 3.0F}, {2, 5.0F}}, {{0, 5.0F}, {1, 3.0F}, {2, 1.0F}}, {{0, 2.0F}, {1, 3.0F}, {2, 4.0F}}});
  CfConfig cfg;
  cfg.significance_cap = 0;
  auto with = neighbors(m, 0, 5, cfg);
  ASSERT_EQ(with.neighbors.size(), 2U);
  // |sim| ties at 1.0, so ascending user index decides.
  EXPECT_EQ(with.neighbors[0].user, 1U);
  EXPECT_DOUBLE_EQ(with.neighbors[0].similarity, -1.0);
  cfg.keep_negative = false;
  auto without = neighbors(m, 0, 5, cfg);
  ASSERT_EQ(without.neighbors.size(), 1U);
  EXPECT_EQ(without.neighbors[0].user, 2U);
}

TEST(Neighbors, FiveUserToyMatchesExhaustiveRanking) {
  RatingMatrix m({"t", "a", "b", "c", "d"}, {"s0", "s1", "s2", "s3", "s4"},
                 {{{0, 5.0F}, {1, 3.0F}, {2, 4.0F}, {3, 1.0F}},
                  {{0, 4.0F}, {1, 1.0F}, {2, 5.0F}, {4, 2.0F}},
                  {{0, 5.0F}, {1, 3.0F}, {2, 4.0F}, {3, 2.0F}, {4, 5.0F}},
                  {{0, 1.0F}, {1, 4.0F}, {3, 5.0F}},
                  {{1, 2.0F}, {4, 3.0F}}});
  const auto d = oracle::densify(m);
  const auto expected = oracle::brute_neighbors(d, 0, 3, 3, 50, true);
  const auto got = neighbors(m, 0, 3);
  ASSERT_EQ(got.neighbors.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(got.neighbors[i].user, expected[i].user);
    EXPECT_NEAR(got.neighbors[i].weight, expected[i].weight, 1e-12);
  }
  // User d shares only 2 songs with t.
  for (const auto& n : got.neighbors) EXPECT_NE(n.user, 4U);
}

// Target t (mean 3); a rates s3=5 with mean 4; b rates s3=2 with mean 3.
RatingMatrix prediction_fixture() {
  return RatingMatrix({"t", "a", "b"}, {"s1", "s2", "s3"},
                      {{{0, 2.0F}, {1, 4.0F}}, {{0, 3.0F}, {2, 5.0F}}, {{0, 4.0F}, {2, 2.0F}}});
}

TEST(PredictRating, WeightedMeanCenteredAverage) {
  const auto m = prediction_fixture();
  NeighborSet set{0, {{1, 0.8, 0.8, 3}, {2, 0.4, 0.4, 3}}};
  const auto p = predict_rating(m, 0, 2, set);
  EXPECT_NEAR(p.value, 3.3333333333333335, 1e-12);
  EXPECT_EQ(p.support, 2U);
}

TEST(PredictRating, ZeroDeviationReturnsOwnMean) {
  RatingMatrix m({"t", "a"}, {"s1", "s2", "s3"}, {{{0, 2.0F}, {1, 4.5F}}, {{0, 3.0F}, {2, 3.0F}}});
  NeighborSet set{0, {{1, 0.7, 0.7, 3}}};
  EXPECT_DOUBLE_EQ(predict_rating(m, 0, 2, set).value, 3.25);
}

TEST(PredictRating, ClampsAndReportsUnclamped) {
  RatingMatrix m({"t", "a"}, {"s1", "s2", "s3"}, {{{0, 4.25F}, {1, 5.0F}}, {{0, 3.0F}, {2, 5.0F}}});
  NeighborSet set{0, {{1, 0.5, 0.5, 3}}};
  const auto p = predict_rating(m, 0, 2, set);
  EXPECT_DOUBLE_EQ(p.unclamped, 4.625 + 1.0);
  EXPECT_DOUBLE_EQ(p.value, 5.0);
}

TEST(PredictRating, NoSupport) {
  const auto m = prediction_fixture();
  NeighborSet set{0, {{1, 0.8, 0.8, 3}}};
  EXPECT_EQ(code_of([&] { predict_rating(m, 0, 1, set); }), ErrorCode::kNoRatingSupport);
}

TEST(PredictRating, ShiftingTargetRatingsShiftsPrediction) {
  std::mt19937_64 rng(8);
  // Quarter steps keep shifted float ratings exact.
  std::uniform_int_distribution<int> quarter(1, 8);
  for (int t = 0; t < 200; ++t) {
    auto base = oracle::random_matrix(rng, 4, 6, 6, 10, 0.8);
    // Squeeze the target row into [1, 3] so the shifted copy stays in range.
    const double c = quarter(rng) / 4.0;
    RatingRow low, high;
    for (const auto& e : base.row(0)) {
      const float v = 1.0F + (e.rating - 1.0F) / 2.0F;
      low.push_back({e.song, v});
      high.push_back({e.song, v + static_cast<float>(c)});
    }
    const auto a = base.with_user("u0", low, false);
    const auto b = base.with_user("u0", high, false);
    NeighborSet na, nb;
    try {
      na = neighbors(a, 0, 30);
      nb = neighbors(b, 0, 30);
    } catch (const Error&) {
      continue;
    }
    ASSERT_EQ(na.neighbors.size(), nb.neighbors.size());
    for (std::size_t i = 0; i < na.neighbors.size(); ++i) {
      ASSERT_EQ(na.neighbors[i].user, nb.neighbors[i].user);
      EXPECT_NEAR(na.neighbors[i].weight, nb.neighbors[i].weight, 1e-12);
    }
    for (std::uint32_t s = 0; s < a.song_count(); ++s) {
      try {
        const auto pa = predict_rating(a, 0, s, na);
        const auto pb = predict_rating(b, 0, s, nb);
        EXPECT_NEAR(pb.unclamped - pa.unclamped, c, 1e-9);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNoRatingSupport);
      }
    }
  }
}

TEST(PredictRating, SingleNeighborIsMeanPlusDeviation) {
  const auto m = prediction_fixture();
  for (double w : {0.3, -0.6}) {
    NeighborSet set{0, {{1, w, w, 3}}};
    const double dev = 5.0 - 4.0;
    EXPECT_NEAR(predict_rating(m, 0, 2, set).unclamped, 3.0 + (w > 0 ? dev : -dev), 1e-12);
  }
}

TEST(RecommendCf, ToyMatchesOracleAndFlags) {
  std::mt19937_64 rng(99);
  const auto m = oracle::random_matrix(rng, 5, 5, 8, 8, 0.7);
  const auto d = oracle::densify(m);
  for (std::size_t u = 0; u < m.user_count(); ++u) {
    const auto nb = oracle::brute_neighbors(d, u, 30, 3, 50, true);
    if (nb.empty()) continue;
    for (bool exclude : {true, false}) {
      const auto expected = oracle::brute_recommend(d, u, nb, 100, exclude);
      const auto got = recommend_cf(m, u, 100, exclude);
      ASSERT_EQ(got.size(), expected.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].song, expected[i].first);
        EXPECT_NEAR(got[i].score, expected[i].second, 1e-9);
      }
    }
  }
}

TEST(RecommendCf, IncludesRatedOnlyWhenAsked) {
  RatingMatrix m({"a", "b"}, {"s1", "s2", "s3", "s4"},
                 {{{0, 1.0F}, {1, 3.0F}, {2, 5.0F}}, {{0, 1.0F}, {1, 3.0F}, {2, 5.0F}, {3, 4.0F}}});
  const auto excl = recommend_cf(m, 0, 10, true);
  ASSERT_EQ(excl.size(), 1U);
  EXPECT_EQ(excl[0].song, 3U);
  const auto incl = recommend_cf(m, 0, 10, false);
  EXPECT_EQ(incl.size(), 4U);
  EXPECT_EQ(recommend_cf(m, 0, 2, false).size(), 2U);
}

TEST(RecommendCf, RandomInstancesMatchOracle) {
  std::mt19937_64 rng(4242);
  int compared = 0;
  for (int t = 0; t < 200; ++t) {
    const auto m = oracle::random_matrix(rng, 2, 6, 3, 10, 0.75);
    const auto d = oracle::densify(m);
    for (std::size_t u = 0; u < m.user_count(); ++u) {
      const auto expected_nb = oracle::brute_neighbors(d, u, 3, 3, 50, true);
      NeighborSet got_nb;
      CfConfig cfg;
      cfg.k = 3;
      try {
        got_nb = neighbors(m, u, 3, cfg);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kEmptyNeighborhood);
        EXPECT_TRUE(expected_nb.empty());
        continue;
      }
      ASSERT_EQ(got_nb.neighbors.size(), expected_nb.size());
      for (std::size_t i = 0; i < expected_nb.size(); ++i) {
        EXPECT_EQ(got_nb.neighbors[i].user, expected_nb[i].user);
      }
      const auto expected = oracle::brute_recommend(d, u, expected_nb, 5, true);
      const auto got = recommend_cf(m, got_nb, 5, true);
      ASSERT_EQ(got.size(), expected.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].song, expected[i].first);
        EXPECT_NEAR(got[i].score, expected[i].second, 1e-9);
        EXPECT_GE(got[i].score, 1.0);
        EXPECT_LE(got[i].score, 5.0);
      }
      ++compared;
    }
  }
  EXPECT_GT(compared, 100);
}

TEST(NeighborIndex, EmptySetsForIsolatedUsers) {
  RatingMatrix m({"a", "b", "c"}, {"s1", "s2", "s3", "s4"},
                 {{{0, 1.0F}, {1, 3.0F}, {2, 5.0F}}, {{0, 2.0F}, {1, 3.0F}, {2, 4.0F}}, {{3, 4.0F}}});
  const auto index = build_neighbor_index(m, {});
  ASSERT_EQ(index.size(), 3U);
  EXPECT_EQ(index[0].neighbors.size(), 1U);
  EXPECT_TRUE(index[2].neighbors.empty());
  EXPECT_EQ(index[2].target, 2U);
}

}  // namespace
}  // namespace explore::cf
