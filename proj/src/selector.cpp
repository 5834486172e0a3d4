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

#include "explore/selector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "explore/error.hpp"

namespace explore::selector {
namespace {

constexpr std::size_t kDuration = static_cast<std::size_t>(Attribute::kDurationMinutes);

void renumber(RankedPlaylist& p) {
  for (std::size_t i = 0; i < p.entries.size(); ++i) p.entries[i].rank = i + 1;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view source_name(Source s) {
  switch (s) {
    case Source::kNostalgic:
      return "nostalgic";
    case Source::kBestOf2022:
      return "best_of_2022";
    case Source::kBestOfAllTime:
      return "best_of_all_time";
  }
  return "nostalgic";
}

std::optional<Source> parse_source(std::string_view s) {
  const auto key = lower(s);
  if (key == "nostalgic" || key == "feeling_nostalgic") return Source::kNostalgic;
  if (key == "best_of_2022") return Source::kBestOf2022;
  if (key == "best_of_all_time") return Source::kBestOfAllTime;
  return std::nullopt;
}

bool MoodFilter::empty() const {
  return std::none_of(ranges.begin(), ranges.end(), [](const auto& r) { return r.has_value(); });
}

void MoodFilter::validate() const {
  for (std::size_t a = 0; a < kAttributeCount; ++a) {
    if (!ranges[a]) continue;
    const auto& r = *ranges[a];
    const std::string name(kAttributeNames[a]);
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw Error(ErrorCode::kInvalidArgument, name + " range bounds must be finite");
    }
    if (r.lo > r.hi) throw Error(ErrorCode::kInvalidArgument, name + " range has lo > hi");
    if (a == kDuration) {
      if (r.lo < 0.0) throw Error(ErrorCode::kInvalidArgument, name + " range must be non-negative");
    } else if (r.lo < 0.0 || r.hi > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, name + " range must lie within [0, 1]");
    }
  }
}

void validate_playlist(const CuratedPlaylist& playlist) {
  if (playlist.songs.empty()) throw Error(ErrorCode::kInvalidArgument, "curated playlist '" + playlist.name + "' is empty");
  std::set<std::string_view> ids;
  for (const auto& s : playlist.songs) {
    if (!ids.insert(s.song_id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "curated playlist '" + playlist.name + "' repeats song id '" + s.song_id + "'");
    }
  }
}

CuratedPlaylist load_curated_playlist(const std::string& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open playlist '" + path + "'");
  CuratedPlaylist out{std::move(name), {}};
  for (auto& rec : parse_song_table(in, false).records) out.songs.push_back(std::move(rec.attributes));
  validate_playlist(out);
  return out;
}

AttributeVector content_vector(const SongAttributes& song, double scale) {
  auto v = song.features();
  v[kDuration] /= scale > 0.0 ? scale : 1.0;
  return v;
}

std::optional<double> content_cosine(const SongAttributes& a, const SongAttributes& b, double scale) {
  const auto x = content_vector(a, scale);
  const auto y = content_vector(b, scale);
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t k = 0; k < kAttributeCount; ++k) {
    xy += x[k] * y[k];
    xx += x[k] * x[k];
    yy += y[k] * y[k];
  }
  if (xx == 0.0 || yy == 0.0) return std::nullopt;
  return std::clamp(xy / std::sqrt(xx * yy), -1.0, 1.0);
}

double duration_scale(const Catalog& catalog, const std::vector<const CuratedPlaylist*>& playlists) {
  double scale = catalog.max_duration();
  for (const auto* p : playlists) {
    if (p == nullptr) continue;
    for (const auto& s : p->songs) scale = std::max(scale, s.duration_minutes);
  }
  return scale > 0.0 ? scale : 1.0;
}

RankedPlaylist corpus_playlist(const RatingMatrix& matrix, const std::vector<ScoredSong>& recs) {
  RankedPlaylist out;
  for (const auto& r : recs) {
    PlaylistEntry e;
    e.song_id = matrix.song_id(r.song);
    e.score = r.score;
    e.source = EntrySource::kCorpus;
    e.explain_song = e.song_id;
    out.entries.push_back(std::move(e));
  }
  renumber(out);
  return out;
}

RankedPlaylist crosswalk(const RankedPlaylist& corpus_recs, const Catalog& catalog, const CuratedPlaylist& playlist,
                         std::size_t n, double scale) {
  if (corpus_recs.entries.empty()) throw Error(ErrorCode::kInvalidArgument, "crosswalk needs at least one corpus rec");
  RankedPlaylist out;
  std::vector<const PlaylistEntry*> walk;
  for (const auto& e : corpus_recs.entries) {
    if (catalog.find(e.song_id) == nullptr) {
      out.warnings.push_back("corpus song '" + e.song_id + "' has no catalog attributes; skipped in crosswalk");
      continue;
    }
    walk.push_back(&e);
  }
  if (walk.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no corpus recommendation has catalog attributes for the crosswalk");
  }
  const std::size_t target = std::min(n, playlist.songs.size());
  if (n > playlist.songs.size()) {
    out.warnings.push_back("PlaylistExhausted: requested " + std::to_string(n) + " songs but '" + playlist.name +
                           "' has " + std::to_string(playlist.songs.size()));
  }
  std::vector<bool> used(playlist.songs.size(), false);
  for (std::size_t step = 0; out.entries.size() < target; ++step) {
    const auto& rec = *walk[step % walk.size()];
    const auto& attrs = *catalog.find(rec.song_id);
    std::size_t best = playlist.songs.size();
    double best_score = 0.0;
    std::int64_t best_key = 0;
    for (std::size_t i = 0; i < playlist.songs.size(); ++i) {
      if (used[i]) continue;
      // Undefined cosine (zero vector) ranks below every defined one.
      const double c = content_cosine(attrs, playlist.songs[i], scale).value_or(-2.0);
      const auto key = ranking_key(c);
      if (best == playlist.songs.size() || key > best_key) {
        best = i;
        best_score = c;
        best_key = key;
      }
    }
    used[best] = true;
    PlaylistEntry e;
    e.song_id = playlist.songs[best].song_id;
    e.score = best_score;
    e.source = EntrySource::kCrosswalk;
    e.provenance = rec.song_id;
    e.explain_song = rec.explain_song.empty() ? rec.song_id : rec.explain_song;
    out.entries.push_back(std::move(e));
  }
  renumber(out);
  return out;
}

RankedPlaylist mood_filter(const RankedPlaylist& playlist, const std::vector<const SongAttributes*>& attributes,
                           const MoodFilter& filter, std::size_t n, double scale) {
  if (attributes.size() != playlist.entries.size()) {
    throw Error(ErrorCode::kLengthMismatch, "mood filter needs attributes for every entry");
  }
  filter.validate();
  RankedPlaylist out;
  out.warnings = playlist.warnings;

  struct Miss {
    std::size_t index;
    double distance;
  };
  std::vector<std::size_t> pass;
  std::vector<Miss> miss;
  for (std::size_t i = 0; i < playlist.entries.size(); ++i) {
    const auto* a = attributes[i];
    if (a == nullptr) throw Error(ErrorCode::kUnknownSong, "no attributes for '" + playlist.entries[i].song_id + "'");
    const auto f = a->features();
    double d = 0.0;
    for (std::size_t k = 0; k < kAttributeCount; ++k) {
      if (!filter.ranges[k]) continue;
      const double dk = filter.ranges[k]->distance(f[k]);
      d += k == kDuration ? dk / (scale > 0.0 ? scale : 1.0) : dk;
    }
    bool inside = true;
    for (std::size_t k = 0; k < kAttributeCount; ++k) {
      if (filter.ranges[k] && !filter.ranges[k]->contains(f[k])) inside = false;
    }
    if (inside) {
      pass.push_back(i);
    } else {
      miss.push_back({i, d});
    }
  }
  std::stable_sort(miss.begin(), miss.end(),
                   [](const Miss& a, const Miss& b) { return ranking_key(a.distance) < ranking_key(b.distance); });
  for (auto i : pass) {
    if (out.entries.size() >= n) break;
    out.entries.push_back(playlist.entries[i]);
    out.entries.back().relaxed = false;
  }
  for (const auto& m : miss) {
    if (out.entries.size() >= n) break;
    out.entries.push_back(playlist.entries[m.index]);
    out.entries.back().relaxed = true;
  }
  renumber(out);
  return out;
}

const SongAttributes* SongSources::find(std::string_view song_id) const {
  if (catalog != nullptr) {
    if (const auto* s = catalog->find(song_id)) return s;
  }
  for (const auto& [source, p] : playlists) {
    if (p == nullptr) continue;
    for (const auto& s : p->songs) {
      if (s.song_id == song_id) return &s;
    }
  }
  return nullptr;
}

double SongSources::duration_scale() const {
  std::vector<const CuratedPlaylist*> ps;
  for (const auto& [source, p] : playlists) ps.push_back(p);
  static const Catalog kEmpty;
  return selector::duration_scale(catalog != nullptr ? *catalog : kEmpty, ps);
}

RankedPlaylist assemble(const RatingMatrix& matrix, const std::vector<ScoredSong>& corpus_recs,
                        const SongSources& sources, Source source, const MoodFilter& filter, std::size_t n) {
  filter.validate();
  const double scale = sources.duration_scale();
  auto pool = corpus_playlist(matrix, corpus_recs);
  if (source != Source::kNostalgic) {
    const auto it = sources.playlists.find(source);
    if (it == sources.playlists.end() || it->second == nullptr) {
      throw Error(ErrorCode::kUnavailable, "no curated playlist configured for source '" +
                                               std::string(source_name(source)) + "'");
    }
    if (sources.catalog == nullptr) throw Error(ErrorCode::kUnavailable, "crosswalk needs a song catalog");
    const auto& playlist = *it->second;
    pool = crosswalk(pool, *sources.catalog, playlist, playlist.songs.size(), scale);
    if (n > playlist.songs.size()) {
      pool.warnings.push_back("PlaylistExhausted: requested " + std::to_string(n) + " songs but '" + playlist.name +
                              "' has " + std::to_string(playlist.songs.size()));
    }
  }
  if (filter.empty()) {
    if (pool.entries.size() > n) pool.entries.resize(n);
    return pool;
  }
  std::vector<const SongAttributes*> attrs;
  RankedPlaylist known;
  known.warnings = pool.warnings;
  for (auto& e : pool.entries) {
    const auto* a = sources.find(e.song_id);
    if (a == nullptr) {
      known.warnings.push_back("song '" + e.song_id + "' has no attributes; dropped by the mood filter");
      continue;
    }
    attrs.push_back(a);
    known.entries.push_back(std::move(e));
  }
  return mood_filter(known, attrs, filter, n, scale);
}

}  // namespace explore::selector
