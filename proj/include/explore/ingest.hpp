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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "explore/catalog.hpp"
#include "explore/rating_matrix.hpp"

namespace explore::ingest {

struct PlayEvent {
  std::string user_id;
  std::string song_id;
  std::int64_t timestamp = 0;  // Unix seconds, UTC

  bool operator==(const PlayEvent&) const = default;
};

struct EventParseResult {
  std::vector<PlayEvent> events;
  std::vector<ParseWarning> warnings;
};

// Reads `user_id<TAB>timestamp<TAB>song_id[<TAB>extra...]` lines. Blank and
// `#` lines are skipped. Throws EmptyInput when the stream has no data line.
// Malformed lines become warnings, or MalformedLine in strict mode.
EventParseResult parse_events(std::istream& in, bool strict = false);

struct MonthIndex {
  int year = 1970;
  int month = 1;  // 1..12

  int ordinal() const { return year * 12 + (month - 1); }
  auto operator<=>(const MonthIndex&) const = default;
};

// Calendar month (UTC) containing the instant.
MonthIndex month_of(std::int64_t timestamp);

// Whole calendar months from `earlier` to `later`; negative when reversed.
inline int months_between(MonthIndex earlier, MonthIndex later) { return later.ordinal() - earlier.ordinal(); }

struct TfKey {
  std::string user_id;
  std::string song_id;
  MonthIndex month;

  auto operator<=>(const TfKey&) const = default;
};

using MonthlyTf = std::map<TfKey, std::uint64_t>;

MonthlyTf monthly_tf(std::span<const PlayEvent> events);

// ln(n_users / (1 + df)), unclamped.
double idf(std::size_t n_users, std::size_t df);

inline constexpr int kDefaultRecencyWindow = 24;

// (window - k) / window inside the window, 0 outside it.
double recency_weight(int months_before_latest, int window = kDefaultRecencyWindow);

struct InteractionScore {
  std::string user_id;
  std::string song_id;
  double raw_score = 0.0;
};

// Recency-weighted sum over months of TF x max(0, IDF), one score per
// (user, song) pair in `tf`, ordered by (user, song).
std::vector<InteractionScore> build_raw_scores(const MonthlyTf& tf, std::size_t n_users, MonthIndex latest_month,
                                               int window = kDefaultRecencyWindow);

struct ScaleResult {
  RatingMatrix matrix;
  std::vector<std::string> dropped_users;
};

// Per-user min-max mapping of positive raw scores onto [1,5]; a user whose
// scores are all equal gets 3.0 everywhere. Zero scores carry no preference
// and are not stored; users left with nothing are reported in
// `dropped_users`. User and song tables are sorted by id.
ScaleResult scale_to_ratings(std::span<const InteractionScore> scores);

struct RatingBuildOptions {
  int window = kDefaultRecencyWindow;
  std::optional<std::int64_t> from_timestamp;  // inclusive
  std::optional<std::int64_t> to_timestamp;    // exclusive
};

struct RatingBuildReport {
  std::size_t events_in = 0;
  std::size_t events_used = 0;
  std::size_t users_seen = 0;
  MonthIndex latest_month;
  std::vector<std::string> dropped_users;
};

struct RatingBuildResult {
  RatingMatrix matrix;
  RatingBuildReport report;
};

// Date filter -> monthly TF -> raw scores -> ratings. Throws EmptyInput when
// no event survives the date filter.
RatingBuildResult build_rating_matrix(std::span<const PlayEvent> events, const RatingBuildOptions& options = {});

}  // namespace explore::ingest
