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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "explore/catalog.hpp"
#include "explore/ranking.hpp"
#include "explore/rating_matrix.hpp"

namespace explore::selector {

enum class Source { kNostalgic, kBestOf2022, kBestOfAllTime };

std::string_view source_name(Source s);  // "nostalgic", "best_of_2022", "best_of_all_time"
std::optional<Source> parse_source(std::string_view s);

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double distance(double v) const { return v < lo ? lo - v : (v > hi ? v - hi : 0.0); }
  bool operator==(const Range&) const = default;
};

// Optional inclusive range per attribute (indexed like kAttributeNames).
struct MoodFilter {
  std::array<std::optional<Range>, kAttributeCount> ranges{};

  bool empty() const;
  // Throws InvalidArgument when lo > hi, a bound is not finite, or a unit
  // attribute range leaves [0, 1] / the duration range is negative.
  void validate() const;
  bool operator==(const MoodFilter&) const = default;
};

struct CuratedPlaylist {
  std::string name;
  std::vector<SongAttributes> songs;

  bool operator==(const CuratedPlaylist&) const = default;
};

// Throws InvalidArgument on an empty playlist or duplicate song ids.
void validate_playlist(const CuratedPlaylist& playlist);
CuratedPlaylist load_curated_playlist(const std::string& path, std::string name);

enum class EntrySource { kCorpus, kCrosswalk };

struct PlaylistEntry {
  std::size_t rank = 0;
  std::string song_id;
  double score = 0.0;
  EntrySource source = EntrySource::kCorpus;
  std::optional<std::string> provenance;  // corpus song a crosswalk entry came from
  bool relaxed = false;                   // filled in outside the mood ranges
  std::string explain_song;               // corpus song whose explanation backs this entry

  bool operator==(const PlaylistEntry&) const = default;
};

struct RankedPlaylist {
  std::vector<PlaylistEntry> entries;
  std::vector<std::string> warnings;

  bool operator==(const RankedPlaylist&) const = default;
};

// The 5-vector used for content similarity: unit features plus duration
// divided by `duration_scale`.
AttributeVector content_vector(const SongAttributes& song, double duration_scale);

// Cosine of the two content vectors; nullopt when either is zero.
std::optional<double> content_cosine(const SongAttributes& a, const SongAttributes& b, double duration_scale);

// Larger of the catalog maximum and every playlist's maximum duration.
double duration_scale(const Catalog& catalog, const std::vector<const CuratedPlaylist*>& playlists);

// Corpus recommendations turned into a playlist, ranks 1..n.
RankedPlaylist corpus_playlist(const RatingMatrix& matrix, const std::vector<ScoredSong>& recs);

// Greedy mapping onto `playlist`: corpus recs are walked in rank order (and
// walked again while slots remain), each taking the most cosine-similar
// unused curated song. Output size is min(n, |playlist|); a larger n adds a
// PlaylistExhausted warning. Recs without catalog attributes are skipped.
RankedPlaylist crosswalk(const RankedPlaylist& corpus_recs, const Catalog& catalog, const CuratedPlaylist& playlist,
                         std::size_t n, double duration_scale);

// Entries passing every set range keep their order; remaining slots up to n
// are filled by the smallest summed distance to the violated bounds
// (duration distance divided by `duration_scale`), flagged relaxed.
// `attributes[i]` describes `playlist.entries[i]`.
RankedPlaylist mood_filter(const RankedPlaylist& playlist, const std::vector<const SongAttributes*>& attributes,
                           const MoodFilter& filter, std::size_t n, double duration_scale);

struct SongSources {
  const Catalog* catalog = nullptr;
  std::map<Source, const CuratedPlaylist*> playlists;

  // Catalog first, then the curated playlists.
  const SongAttributes* find(std::string_view song_id) const;
  double duration_scale() const;
};

// Source toggle, then mood filter. `corpus_recs` is the full ranked
// candidate pool for the user (best first).
RankedPlaylist assemble(const RatingMatrix& matrix, const std::vector<ScoredSong>& corpus_recs,
                        const SongSources& sources, Source source, const MoodFilter& filter, std::size_t n);

}  // namespace explore::selector
