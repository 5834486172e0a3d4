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

#include "explore/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "explore/error.hpp"
#include "text.hpp"

namespace explore {

namespace text {

std::optional<std::vector<std::string>> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace text

namespace {

constexpr std::array<std::string_view, 9> kRequiredColumns = {
    "song_id", "title", "artist", "genre", "danceability", "energy", "instrumentalness", "liveness",
    "duration_minutes"};
constexpr std::string_view kInCorpusColumn = "in_corpus_song_id";

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

SongTableResult parse_song_table(std::istream& in, bool strict) {
  SongTableResult result;
  std::string line;
  std::size_t line_no = 0;

  std::map<std::string, std::size_t, std::less<>> columns;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto header = text::split_csv_line(line);
    if (!header) throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no) + ": bad header");
    for (std::size_t i = 0; i < header->size(); ++i) {
      columns.emplace(std::string(text::trim((*header)[i])), i);
    }
    have_header = true;
  }
  if (!have_header) throw Error(ErrorCode::kEmptyInput, "song table is empty");
  for (auto name : kRequiredColumns) {
    if (!columns.contains(name)) {
      throw Error(ErrorCode::kMalformedLine, "header is missing column '" + std::string(name) + "'");
    }
  }
  const auto in_corpus_col = columns.find(kInCorpusColumn);
  const std::size_t min_fields = [&] {
    std::size_t m = 0;
    for (auto name : kRequiredColumns) m = std::max(m, columns.find(name)->second + 1);
    return m;
  }();

  auto fail = [&](const std::string& msg) {
    const std::string full = "line " + std::to_string(line_no) + ": " + msg;
    if (strict) throw Error(ErrorCode::kMalformedLine, full);
    result.warnings.push_back({line_no, msg});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto fields = text::split_csv_line(line);
    if (!fields) {
      fail("unterminated quote");
      continue;
    }
    if (fields->size() < min_fields) {
      fail("expected at least " + std::to_string(min_fields) + " columns, got " + std::to_string(fields->size()));
      continue;
    }
    auto col = [&](std::string_view name) -> std::string_view { return (*fields)[columns.find(name)->second]; };

    SongRecord rec;
    auto& a = rec.attributes;
    a.song_id = std::string(text::trim(col("song_id")));
    a.title = std::string(col("title"));
    a.artist = std::string(col("artist"));
    a.genre = std::string(text::trim(col("genre")));
    if (a.song_id.empty()) {
      fail("empty song_id");
      continue;
    }
    bool ok = true;
    std::array<double, kAttributeCount> values{};
    for (std::size_t k = 0; k < kAttributeCount; ++k) {
      auto v = text::parse_double(col(kAttributeNames[k]));
      if (!v || !std::isfinite(*v)) {
        fail("non-numeric " + std::string(kAttributeNames[k]));
        ok = false;
        break;
      }
      values[k] = *v;
    }
    if (!ok) continue;
    if (values[4] <= 0.0) {
      fail("duration_minutes must be positive");
      continue;
    }
    a.danceability = clamp_unit(values[0]);
    a.energy = clamp_unit(values[1]);
    a.instrumentalness = clamp_unit(values[2]);
    a.liveness = clamp_unit(values[3]);
    a.duration_minutes = values[4];
    if (in_corpus_col != columns.end() && in_corpus_col->second < fields->size()) {
      auto id = text::trim((*fields)[in_corpus_col->second]);
      if (!id.empty()) rec.in_corpus_song_id = std::string(id);
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

Catalog::Catalog(std::vector<SongAttributes> songs) : songs_(std::move(songs)) {
  index_.reserve(songs_.size());
  for (std::size_t i = 0; i < songs_.size(); ++i) {
    if (!index_.emplace(songs_[i].song_id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate song id '" + songs_[i].song_id + "' in catalog");
    }
    max_duration_ = std::max(max_duration_, songs_[i].duration_minutes);
  }
}

const SongAttributes* Catalog::find(std::string_view song_id) const {
  auto it = index_.find(std::string(song_id));
  return it == index_.end() ? nullptr : &songs_[it->second];
}

CatalogParseResult parse_catalog(std::istream& in, bool strict) {
  auto table = parse_song_table(in, strict);
  CatalogParseResult result;
  result.warnings = std::move(table.warnings);
  std::vector<SongAttributes> songs;
  std::unordered_map<std::string, bool> seen;
  for (auto& rec : table.records) {
    if (!seen.emplace(rec.attributes.song_id, true).second) {
      const std::string msg = "duplicate song_id '" + rec.attributes.song_id + "' skipped";
      if (strict) throw Error(ErrorCode::kMalformedLine, msg);
      result.warnings.push_back({0, msg});
      continue;
    }
    songs.push_back(std::move(rec.attributes));
  }
  result.catalog = Catalog(std::move(songs));
  return result;
}

CatalogParseResult load_catalog(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open catalog '" + path + "'");
  return parse_catalog(in, strict);
}

}  // namespace explore
