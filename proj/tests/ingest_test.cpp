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

#include "explore/ingest.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "explore/error.hpp"
#include "oracles/rating_oracle.hpp"

namespace explore::ingest {
namespace {

constexpr std::int64_t kJan2008 = 1199145600;  // 2008-01-01T00:00:00Z
constexpr std::int64_t kDay = 86400;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an explore::Error";
  return ErrorCode::kInvalidArgument;
}

TEST(ParseEvents, MapsFields) {
  std::istringstream in("u1\t1199145600\ts9\n");
  auto r = parse_events(in);
  ASSERT_EQ(r.events.size(), 1U);
  EXPECT_EQ(r.events[0], (PlayEvent{"u1", "s9", 1199145600}));
  EXPECT_TRUE(r.warnings.empty());
}

TEST(ParseEvents, NonIntegerTimestampIsMalformed) {
  std::istringstream in("u1\tabc\ts9\n");
  auto r = parse_events(in);
  EXPECT_TRUE(r.events.empty());
  ASSERT_EQ(r.warnings.size(), 1U);
  EXPECT_EQ(r.warnings[0].line, 1U);
}

TEST(ParseEvents, CollectsWarningsAndKeepsValidLines) {
  std::istringstream in(
      "# header comment\n"
      "u1\t1199145600\ts1\textra\tcols\n"
      "u2\t1199145601\ts2\n"
      "broken line\n"
      "u3\t1199145602\ts3\n");
  auto r = parse_events(in);
  EXPECT_EQ(r.events.size(), 3U);
  ASSERT_EQ(r.warnings.size(), 1U);
  EXPECT_EQ(r.warnings[0].line, 4U);
  EXPECT_EQ(r.events[1].song_id, "s2");
}

TEST(ParseEvents, StrictModeThrows) {
  std::istringstream in("u1\t1199145600\ts1\nu1\t-5\ts1\n");
  EXPECT_EQ(code_of([&] { parse_events(in, true); }), ErrorCode::kMalformedLine);
}

TEST(ParseEvents, EmptyInputIsFatal) {
  std::istringstream in("# only a comment\n\n");
  EXPECT_EQ(code_of([&] { parse_events(in); }), ErrorCode::kEmptyInput);
}

TEST(MonthOf, CalendarBoundaries) {
  EXPECT_EQ(month_of(kJan2008), (MonthIndex{2008, 1}));
  EXPECT_EQ(month_of(kJan2008 - 1), (MonthIndex{2007, 12}));
  EXPECT_EQ(month_of(1), (MonthIndex{1970, 1}));
}

TEST(MonthOf, AgreesWithCivilCalendarOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> ts(1, 4102444800);  // through 2100
  for (int i = 0; i < 5000; ++i) {
    const auto t = ts(rng);
    const auto [y, m] = oracle::civil_year_month(t);
    EXPECT_EQ(month_of(t), (MonthIndex{y, m})) << t;
  }
}

TEST(MonthlyTf, Groups) {
  std::vector<PlayEvent> ev = {{"u1", "s1", kJan2008}, {"u1", "s1", kJan2008 + kDay}, {"u1", "s1", kJan2008 + 2 * kDay}};
  auto tf = monthly_tf(ev);
  ASSERT_EQ(tf.size(), 1U);
  EXPECT_EQ((tf.at({"u1", "s1", {2008, 1}})), 3U);

  ev.push_back({"u1", "s1", kJan2008 + 40 * kDay});
  EXPECT_EQ(monthly_tf(ev).size(), 2U);
  EXPECT_TRUE(monthly_tf({}).empty());
}

TEST(Idf, Values) {
  EXPECT_NEAR(idf(4, 1), 0.6931471805599453, 1e-15);
  EXPECT_DOUBLE_EQ(idf(4, 3), 0.0);
  EXPECT_NEAR(idf(992, 0), 6.899723107284872, 1e-12);
  EXPECT_LT(idf(4, 4), 0.0);
}

TEST(RecencyWeight, LinearDecayInsideWindow) {
  EXPECT_DOUBLE_EQ(recency_weight(0), 1.0);
  EXPECT_DOUBLE_EQ(recency_weight(1), 23.0 / 24.0);
  EXPECT_NEAR(recency_weight(23), 0.041666666666666664, 1e-15);
  EXPECT_DOUBLE_EQ(recency_weight(24), 0.0);
  EXPECT_DOUBLE_EQ(recency_weight(100), 0.0);
}

// Four users; u1 plays s1 three times; s1 has df=1 that month.
std::vector<PlayEvent> four_user_fixture(std::int64_t s1_time) {
  return {{"u1", "s1", s1_time},       {"u1", "s1", s1_time + 60}, {"u1", "s1", s1_time + 120},
          {"u2", "s2", kJan2008 + 10}, {"u3", "s2", kJan2008 + 20}, {"u4", "s3", kJan2008 + 30}};
}

double score_of(const std::vector<InteractionScore>& scores, std::string_view u, std::string_view s) {
  for (const auto& x : scores) {
    if (x.user_id == u && x.song_id == s) return x.raw_score;
  }
  ADD_FAILURE() << "missing score " << u << "/" << s;
  return -1.0;
}

TEST(BuildRawScores, HandEvaluatedExamples) {
  {
    auto tf = monthly_tf(four_user_fixture(kJan2008));
    auto scores = build_raw_scores(tf, 4, {2008, 1});
    EXPECT_NEAR(score_of(scores, "u1", "s1"), 2.0794415416798357, 1e-12);
  }
  {
    // One month earlier: December 2007.
    auto tf = monthly_tf(four_user_fixture(kJan2008 - 20 * kDay));
    auto scores = build_raw_scores(tf, 4, {2008, 1});
    EXPECT_NEAR(score_of(scores, "u1", "s1"), 1.9927981441098426, 1e-12);
  }
  {
    // Every user played s9 in the same month: df = N, contribution clamps to 0.
    std::vector<PlayEvent> ev = {{"a", "s9", kJan2008}, {"b", "s9", kJan2008}, {"c", "s9", kJan2008}};
    auto scores = build_raw_scores(monthly_tf(ev), 3, {2008, 1});
    for (const auto& s : scores) EXPECT_EQ(s.raw_score, 0.0);
  }
}

TEST(BuildRawScores, OutsideWindowContributesNothing) {
  std::vector<PlayEvent> ev = {{"u1", "s1", kJan2008}, {"u2", "s2", kJan2008 + 3 * 365 * kDay},
                               {"u3", "s3", kJan2008}, {"u4", "s4", kJan2008}};
  auto tf = monthly_tf(ev);
  auto scores = build_raw_scores(tf, 4, month_of(kJan2008 + 3 * 365 * kDay));
  EXPECT_EQ(score_of(scores, "u1", "s1"), 0.0);
  EXPECT_GT(score_of(scores, "u2", "s2"), 0.0);
}

std::vector<PlayEvent> random_events(std::mt19937_64& rng, int max_users, int max_songs, int max_months) {
  std::uniform_int_distribution<int> nu(2, max_users), ns(1, max_songs), nm(1, max_months), cnt(1, 40);
  const int users = nu(rng), songs = ns(rng), months = nm(rng), n = cnt(rng);
  std::uniform_int_distribution<int> pu(0, users - 1), ps(0, songs - 1), pm(0, months - 1), sec(0, 27 * 86400);
  std::vector<PlayEvent> ev;
  for (int i = 0; i < n; ++i) {
    const std::int64_t month_start = kJan2008 + static_cast<std::int64_t>(pm(rng)) * 31 * kDay;
    ev.push_back({"u" + std::to_string(pu(rng)), "s" + std::to_string(ps(rng)), month_start + sec(rng)});
  }
  return ev;
}

TEST(BuildRawScores, MatchesNestedLoopOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto ev = random_events(rng, 5, 10, 3);
    auto expected = oracle::nested_loop_scores(ev);
    auto tf = monthly_tf(ev);
    std::set<std::string> users;
    MonthIndex latest{0, 1};
    for (const auto& [k, c] : tf) {
      users.insert(k.user_id);
      latest = std::max(latest, k.month);
    }
    auto scores = build_raw_scores(tf, users.size(), latest);
    ASSERT_EQ(scores.size(), expected.size());
    for (const auto& s : scores) {
      EXPECT_NEAR(s.raw_score, (expected.at({s.user_id, s.song_id})), 1e-12);
    }
  }
}

TEST(BuildRawScores, TfConservesEventCount) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto ev = random_events(rng, 6, 8, 4);
    std::uint64_t total = 0;
    for (const auto& [k, c] : monthly_tf(ev)) {
      EXPECT_GE(c, 1U);
      total += c;
    }
    EXPECT_EQ(total, ev.size());
  }
}

TEST(ScaleToRatings, MinMaxExamples) {
  std::vector<InteractionScore> s = {{"u", "a", 2.0}, {"u", "b", 4.0}, {"u", "c", 6.0}, {"v", "a", 1.5},
                                     {"w", "a", 7.0}, {"w", "b", 7.0}};
  auto r = scale_to_ratings(s);
  const auto& m = r.matrix;
  const auto u = *m.find_user("u");
  EXPECT_EQ(*m.rating(u, *m.find_song("a")), 1.0);
  EXPECT_EQ(*m.rating(u, *m.find_song("b")), 3.0);
  EXPECT_EQ(*m.rating(u, *m.find_song("c")), 5.0);
  EXPECT_EQ(*m.rating(*m.find_user("v"), *m.find_song("a")), 3.0);
  EXPECT_EQ(*m.rating(*m.find_user("w"), *m.find_song("b")), 3.0);
  EXPECT_DOUBLE_EQ(m.user_mean(u), 3.0);
}

TEST(ScaleToRatings, UserWithoutPositiveScoreIsDropped) {
  std::vector<InteractionScore> s = {{"u", "a", 2.0}, {"z", "a", 0.0}};
  auto r = scale_to_ratings(s);
  EXPECT_EQ(r.dropped_users, std::vector<std::string>{"z"});
  EXPECT_FALSE(r.matrix.find_user("z").has_value());
}

TEST(ScaleToRatings, InvariantToPositiveRescalingPerUser) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(0.01, 10.0), factor(0.1, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<InteractionScore> s, scaled;
    const double f = factor(rng);
    for (int i = 0; i < 6; ++i) {
      const double v = val(rng);
      s.push_back({"u", "s" + std::to_string(i), v});
      scaled.push_back({"u", "s" + std::to_string(i), v * f});
    }
    EXPECT_EQ(scale_to_ratings(s).matrix, scale_to_ratings(scaled).matrix);
  }
}

TEST(BuildRatingMatrix, IndependentOfEventOrder) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    auto ev = random_events(rng, 6, 10, 4);
    RatingMatrix base;
    try {
      base = build_rating_matrix(ev).matrix;
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::kEmptyInput);
      continue;
    }
    for (int p = 0; p < 3; ++p) {
      std::shuffle(ev.begin(), ev.end(), rng);
      EXPECT_EQ(build_rating_matrix(ev).matrix, base);
    }
    for (std::size_t u = 0; u < base.user_count(); ++u) {
      double sum = 0.0;
      for (const auto& e : base.row(u)) {
        EXPECT_GE(e.rating, 1.0F);
        EXPECT_LE(e.rating, 5.0F);
        sum += e.rating;
      }
      EXPECT_NEAR(base.user_mean(u), sum / static_cast<double>(base.row(u).size()), 1e-9);
    }
  }
}

TEST(BuildRatingMatrix, DateRangeIsConfiguration) {
  std::vector<PlayEvent> ev = {{"u1", "s1", kJan2008},
                               {"u2", "s2", kJan2008 + kDay},
                               {"u4", "s4", kJan2008 + 2 * kDay},
                               {"u3", "s3", kJan2008 + 400 * kDay}};
  RatingBuildOptions opt;
  opt.to_timestamp = kJan2008 + 300 * kDay;
  auto r = build_rating_matrix(ev, opt);
  EXPECT_EQ(r.report.events_used, 3U);
  EXPECT_FALSE(r.matrix.find_user("u3").has_value());

  opt.from_timestamp = kJan2008 + 1000 * kDay;
  EXPECT_EQ(code_of([&] { build_rating_matrix(ev, opt); }), ErrorCode::kEmptyInput);
}

}  // namespace
}  // namespace explore::ingest
