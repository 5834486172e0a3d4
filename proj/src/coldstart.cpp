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

#include "explore/coldstart.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "explore/error.hpp"
#include "explore/ranking.hpp"
#include "text.hpp"

namespace explore::coldstart {
namespace {

// Attribute vector with duration scaled into [0, 1] by the catalog maximum.
AttributeVector normalized(const SongAttributes& song, double max_duration) {
  auto v = song.features();
  v[static_cast<std::size_t>(Attribute::kDurationMinutes)] /= max_duration > 0.0 ? max_duration : 1.0;
  return v;
}

}  // namespace

std::string genre_key(std::string_view genre) {
  const auto trimmed = text::trim(genre);
  return trimmed.empty() ? std::string(kUnknownGenre) : std::string(trimmed);
}

SeedProfile parse_seed_profile(std::istream& in, std::string external_user_id, std::vector<ParseWarning>* warnings) {
  SeedProfile profile;
  profile.external_user_id = std::move(external_user_id);
  auto table = parse_song_table(in, false);
  if (warnings != nullptr) *warnings = std::move(table.warnings);
  if (table.records.empty()) throw Error(ErrorCode::kEmptyInput, "seed file has no songs");
  profile.seeds = std::move(table.records);
  return profile;
}

GenreAffinity genre_affinity(const SeedProfile& profile) {
  if (profile.seeds.empty()) throw Error(ErrorCode::kEmptyInput, "seed profile has no songs");
  std::map<std::string, std::size_t> counts;
  for (const auto& seed : profile.seeds) ++counts[genre_key(seed.attributes.genre)];
  GenreAffinity out;
  const auto total = static_cast<double>(profile.seeds.size());
  for (const auto& [genre, count] : counts) out[genre] = static_cast<double>(count) / total;
  return out;
}

std::vector<std::uint32_t> representative_songs(const RatingMatrix& matrix, const Catalog& catalog,
                                                std::string_view genre, std::size_t m,
                                                std::vector<std::string>* warnings) {
  struct Candidate {
    std::uint32_t song;
    std::size_t listeners;
    AttributeVector features;
    double distance = 0.0;
  };
  std::vector<std::size_t> listeners(matrix.song_count(), 0);
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    if (matrix.is_synthetic(u)) continue;
    for (const auto& e : matrix.row(u)) ++listeners[e.song];
  }

  const auto key = genre_key(genre);
  std::vector<Candidate> candidates;
  for (const auto& song : catalog.songs()) {
    if (genre_key(song.genre) != key) continue;
    const auto idx = matrix.find_song(song.song_id);
    if (!idx) continue;
    candidates.push_back({static_cast<std::uint32_t>(*idx), listeners[*idx], normalized(song, catalog.max_duration())});
  }
  if (candidates.empty()) {
    if (warnings != nullptr) warnings->push_back("UnknownGenre: no corpus songs of genre '" + key + "'");
    return {};
  }

  AttributeVector centroid{};
  for (const auto& c : candidates) {
    for (std::size_t a = 0; a < kAttributeCount; ++a) centroid[a] += c.features[a];
  }
  for (auto& x : centroid) x /= static_cast<double>(candidates.size());
  for (auto& c : candidates) {
    double ss = 0.0;
    for (std::size_t a = 0; a < kAttributeCount; ++a) ss += (c.features[a] - centroid[a]) * (c.features[a] - centroid[a]);
    c.distance = std::sqrt(ss);
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.listeners != b.listeners) return a.listeners > b.listeners;
    const auto da = ranking_key(a.distance), db = ranking_key(b.distance);
    if (da != db) return da < db;
    return a.song < b.song;
  });
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < candidates.size() && i < m; ++i) out.push_back(candidates[i].song);
  return out;
}

RatingRow synthesize_user_row(const GenreAffinity& affinity,
                              const std::map<std::string, std::vector<std::uint32_t>>& representatives,
                              const std::vector<std::uint32_t>& matched) {
  double max_weight = 0.0;
  for (const auto& [genre, w] : affinity) max_weight = std::max(max_weight, w);

  std::map<std::uint32_t, double> ratings;
  if (max_weight > 0.0) {
    for (const auto& [genre, w] : affinity) {
      const auto it = representatives.find(genre);
      if (it == representatives.end()) continue;
      const double r = std::clamp(1.0 + 4.0 * (w / max_weight), kMinRating, kMaxRating);
      for (auto s : it->second) ratings[s] = std::max(ratings[s], r);
    }
  }
  for (auto s : matched) ratings[s] = kMaxRating;
  if (ratings.empty()) {
    throw Error(ErrorCode::kNoRepresentatives, "no corpus song could be matched or chosen as a genre representative");
  }
  RatingRow row;
  for (const auto& [s, r] : ratings) row.push_back({s, static_cast<float>(r)});
  return row;
}

ColdStartResult cold_start(const RatingMatrix& matrix, const Catalog& catalog, const SeedProfile& profile,
                           std::size_t m) {
  if (text::trim(profile.external_user_id).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cold-start user id must be non-empty");
  }
  if (const auto existing = matrix.find_user(profile.external_user_id); existing && !matrix.is_synthetic(*existing)) {
    throw Error(ErrorCode::kInvalidArgument,
                "user '" + profile.external_user_id + "' already exists in the corpus; cold start is for new users");
  }
  ColdStartResult out{.matrix = matrix, .user = 0, .affinity = {}, .row = {}, .warnings = {}};
  out.affinity = genre_affinity(profile);

  std::map<std::string, std::vector<std::uint32_t>> reps;
  for (const auto& [genre, w] : out.affinity) reps[genre] = representative_songs(matrix, catalog, genre, m, &out.warnings);

  std::vector<std::uint32_t> matched;
  std::set<std::string> unmatched;
  for (const auto& seed : profile.seeds) {
    if (!seed.in_corpus_song_id) continue;
    if (const auto idx = matrix.find_song(*seed.in_corpus_song_id)) {
      matched.push_back(static_cast<std::uint32_t>(*idx));
    } else {
      unmatched.insert(*seed.in_corpus_song_id);
    }
  }
  for (const auto& id : unmatched) out.warnings.push_back("in_corpus_song_id '" + id + "' is not in the corpus; ignored");

  out.row = synthesize_user_row(out.affinity, reps, matched);
  out.matrix = matrix.with_user(profile.external_user_id, out.row, true);
  out.user = *out.matrix.find_user(profile.external_user_id);
  return out;
}

}  // namespace explore::coldstart
