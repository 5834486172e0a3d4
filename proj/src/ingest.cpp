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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <utility>

#include "explore/error.hpp"
#include "text.hpp"

namespace explore::ingest {

EventParseResult parse_events(std::istream& in, bool strict) {
  EventParseResult result;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_lines = 0;

  auto fail = [&](const std::string& msg) {
    if (strict) throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no) + ": " + msg);
    result.warnings.push_back({line_no, msg});
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    ++data_lines;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    const auto cols = text::split(view, '\t');
    if (cols.size() < 3) {
      fail("expected at least 3 tab-separated columns, got " + std::to_string(cols.size()));
      continue;
    }
    const auto ts = text::parse_int(cols[1]);
    if (!ts) {
      fail("timestamp is not an integer");
      continue;
    }
    if (*ts <= 0) {
      fail("timestamp must be positive");
      continue;
    }
    const auto user = text::trim(cols[0]);
    const auto song = text::trim(cols[2]);
    if (user.empty() || song.empty()) {
      fail("empty user or song id");
      continue;
    }
    result.events.push_back({std::string(user), std::string(song), *ts});
  }
  if (data_lines == 0) throw Error(ErrorCode::kEmptyInput, "event log contains no data lines");
  return result;
}

MonthIndex month_of(std::int64_t timestamp) {
  using namespace std::chrono;
  const sys_seconds instant{seconds{timestamp}};
  const year_month_day ymd{floor<days>(instant)};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
}

MonthlyTf monthly_tf(std::span<const PlayEvent> events) {
  MonthlyTf tf;
  for (const auto& e : events) ++tf[TfKey{e.user_id, e.song_id, month_of(e.timestamp)}];
  return tf;
}

double idf(std::size_t n_users, std::size_t df) {
  return std::log(static_cast<double>(n_users) / (1.0 + static_cast<double>(df)));
}

double recency_weight(int months_before_latest, int window) {
  if (window <= 0) throw Error(ErrorCode::kInvalidArgument, "recency window must be positive");
  if (months_before_latest < 0) throw Error(ErrorCode::kInvalidArgument, "month lies after the latest month");
  if (months_before_latest >= window) return 0.0;
  return static_cast<double>(window - months_before_latest) / static_cast<double>(window);
}

std::vector<InteractionScore> build_raw_scores(const MonthlyTf& tf, std::size_t n_users, MonthIndex latest_month,
                                               int window) {
  if (n_users == 0 && !tf.empty()) throw Error(ErrorCode::kInvalidArgument, "n_users must be positive");

  // Keys are unique per (user, song, month), so df is a key count.
  std::map<std::pair<std::string, MonthIndex>, std::size_t> df;
  for (const auto& [key, count] : tf) ++df[{key.song_id, key.month}];

  std::vector<InteractionScore> scores;
  for (const auto& [key, count] : tf) {
    const double weight = recency_weight(months_between(key.month, latest_month), window);
    const double w_idf = std::max(0.0, idf(n_users, df.at({key.song_id, key.month})));
    const double contribution = weight * static_cast<double>(count) * w_idf;
    if (!scores.empty() && scores.back().user_id == key.user_id && scores.back().song_id == key.song_id) {
      scores.back().raw_score += contribution;
    } else {
      scores.push_back({key.user_id, key.song_id, contribution});
    }
  }
  return scores;
}

ScaleResult scale_to_ratings(std::span<const InteractionScore> scores) {
  // user -> (song -> score), both sorted by id.
  std::map<std::string, std::map<std::string, double>> by_user;
  std::set<std::string> all_users;
  for (const auto& s : scores) {
    if (!(s.raw_score >= 0.0) || !std::isfinite(s.raw_score)) {
      throw Error(ErrorCode::kInvalidArgument, "raw score must be finite and non-negative");
    }
    all_users.insert(s.user_id);
    if (s.raw_score > 0.0) by_user[s.user_id][s.song_id] += s.raw_score;
  }

  ScaleResult result;
  for (const auto& u : all_users) {
    if (!by_user.contains(u)) result.dropped_users.push_back(u);
  }

  std::set<std::string> song_set;
  for (const auto& [user, row] : by_user) {
    for (const auto& [song, score] : row) song_set.insert(song);
  }
  std::vector<std::string> songs(song_set.begin(), song_set.end());
  std::map<std::string_view, std::uint32_t> song_index;
  for (std::uint32_t i = 0; i < songs.size(); ++i) song_index.emplace(songs[i], i);

  std::vector<std::string> users;
  std::vector<RatingRow> rows;
  for (const auto& [user, row] : by_user) {
    double lo = row.begin()->second;
    double hi = lo;
    for (const auto& [song, score] : row) {
      lo = std::min(lo, score);
      hi = std::max(hi, score);
    }
    RatingRow out;
    out.reserve(row.size());
    for (const auto& [song, score] : row) {
      const double r = hi > lo ? 1.0 + 4.0 * (score - lo) / (hi - lo) : 3.0;
      out.push_back({song_index.at(song), static_cast<float>(std::clamp(r, kMinRating, kMaxRating))});
    }
    // Song ids are sorted, so indices already are.
    users.push_back(user);
    rows.push_back(std::move(out));
  }
  result.matrix = RatingMatrix(std::move(users), std::move(songs), std::move(rows));
  return result;
}

RatingBuildResult build_rating_matrix(std::span<const PlayEvent> events, const RatingBuildOptions& options) {
  std::vector<PlayEvent> kept;
  kept.reserve(events.size());
  for (const auto& e : events) {
    if (options.from_timestamp && e.timestamp < *options.from_timestamp) continue;
    if (options.to_timestamp && e.timestamp >= *options.to_timestamp) continue;
    kept.push_back(e);
  }
  if (kept.empty()) throw Error(ErrorCode::kEmptyInput, "no events inside the configured date range");

  const auto tf = monthly_tf(kept);
  std::set<std::string_view> users;
  MonthIndex latest = tf.begin()->first.month;
  for (const auto& [key, count] : tf) {
    users.insert(key.user_id);
    latest = std::max(latest, key.month);
  }
  const auto raw = build_raw_scores(tf, users.size(), latest, options.window);
  auto scaled = scale_to_ratings(raw);
  if (scaled.matrix.empty()) throw Error(ErrorCode::kEmptyInput, "no user has a positive interaction score");

  RatingBuildResult result;
  result.report.events_in = events.size();
  result.report.events_used = kept.size();
  result.report.users_seen = users.size();
  result.report.latest_month = latest;
  result.report.dropped_users = std::move(scaled.dropped_users);
  result.matrix = std::move(scaled.matrix);
  return result;
}

}  // namespace explore::ingest
