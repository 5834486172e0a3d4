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
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace explore {

inline constexpr std::size_t kAttributeCount = 5;

// Interpretable song attributes in their canonical order. Every feature
// vector, mood filter and latent mapper in the engine uses this order.
inline constexpr std::array<std::string_view, kAttributeCount> kAttributeNames = {
    "danceability", "energy", "instrumentalness", "liveness", "duration_minutes"};

enum class Attribute : std::size_t {
  kDanceability = 0,
  kEnergy = 1,
  kInstrumentalness = 2,
  kLiveness = 3,
  kDurationMinutes = 4,
};

using AttributeVector = std::array<double, kAttributeCount>;

struct SongAttributes {
  std::string song_id;
  std::string title;
  std::string artist;
  std::string genre;
  double danceability = 0.0;
  double energy = 0.0;
  double instrumentalness = 0.0;
  double liveness = 0.0;
  double duration_minutes = 1.0;

  AttributeVector features() const {
    return {danceability, energy, instrumentalness, liveness, duration_minutes};
  }
  double attribute(Attribute a) const { return features()[static_cast<std::size_t>(a)]; }

  bool operator==(const SongAttributes&) const = default;
};

struct ParseWarning {
  std::size_t line = 0;
  std::string message;
};

// One row of a catalog-schema CSV. Seed files may carry `in_corpus_song_id`.
struct SongRecord {
  SongAttributes attributes;
  std::optional<std::string> in_corpus_song_id;
};

struct SongTableResult {
  std::vector<SongRecord> records;
  std::vector<ParseWarning> warnings;
};

// Parses `song_id,title,artist,genre,danceability,energy,instrumentalness,
// liveness,duration_minutes[,in_corpus_song_id]`. Columns are matched by
// header name; unknown columns are ignored. Unit-interval features are
// clamped to [0,1]; a non-positive duration makes the row malformed.
// Lenient mode skips malformed rows with a warning, strict mode throws
// MalformedLine. A missing required header column always throws.
SongTableResult parse_song_table(std::istream& in, bool strict = false);

class Catalog {
 public:
  Catalog() = default;
  // Duplicate song ids are rejected with InvalidArgument.
  explicit Catalog(std::vector<SongAttributes> songs);

  const std::vector<SongAttributes>& songs() const { return songs_; }
  std::size_t size() const { return songs_.size(); }
  bool empty() const { return songs_.empty(); }

  const SongAttributes* find(std::string_view song_id) const;
  double max_duration() const { return max_duration_; }

  bool operator==(const Catalog& other) const { return songs_ == other.songs_; }

 private:
  std::vector<SongAttributes> songs_;
  std::unordered_map<std::string, std::size_t> index_;
  double max_duration_ = 0.0;
};

struct CatalogParseResult {
  Catalog catalog;
  std::vector<ParseWarning> warnings;
};

CatalogParseResult parse_catalog(std::istream& in, bool strict = false);
CatalogParseResult load_catalog(const std::string& path, bool strict = false);

}  // namespace explore
