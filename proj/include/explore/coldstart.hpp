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

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "explore/catalog.hpp"
#include "explore/rating_matrix.hpp"

namespace explore::coldstart {

inline constexpr std::string_view kUnknownGenre = "unknown";
inline constexpr std::size_t kDefaultRepresentatives = 10;

struct SeedProfile {
  std::string external_user_id;
  std::vector<SongRecord> seeds;  // may reference songs outside the corpus
};

// genre -> share of seed songs; weights sum to 1.
using GenreAffinity = std::map<std::string, double>;

// Seed CSV: catalog schema plus optional in_corpus_song_id. Throws
// EmptyInput when the file has no seed rows.
SeedProfile parse_seed_profile(std::istream& in, std::string external_user_id, std::vector<ParseWarning>* warnings = nullptr);

// Empty or missing genre labels count as "unknown". Throws EmptyInput on
// an empty seed list.
GenreAffinity genre_affinity(const SeedProfile& profile);

std::string genre_key(std::string_view genre);

// Corpus songs of `genre` (catalog genre, matrix membership), ranked by
// listener count, then distance to the genre's attribute centroid, then song
// index. Returns matrix song indices; an unknown genre yields an empty list
// and a warning.
std::vector<std::uint32_t> representative_songs(const RatingMatrix& matrix, const Catalog& catalog,
                                                std::string_view genre, std::size_t m,
                                                std::vector<std::string>* warnings = nullptr);

// Representatives of genre g get 1 + 4 * weight(g) / max_weight; corpus
// songs in `matched` get 5.0. Throws NoRepresentatives on an empty result.
RatingRow synthesize_user_row(const GenreAffinity& affinity,
                              const std::map<std::string, std::vector<std::uint32_t>>& representatives,
                              const std::vector<std::uint32_t>& matched);

struct ColdStartResult {
  RatingMatrix matrix;  // input plus the synthetic user
  std::size_t user = 0;
  GenreAffinity affinity;
  RatingRow row;
  std::vector<std::string> warnings;
};

// Full onboarding: affinity, representatives per genre, synthetic row
// appended as a flagged user. An existing synthetic user with the same id is
// replaced; a real user with that id is rejected with InvalidArgument.
ColdStartResult cold_start(const RatingMatrix& matrix, const Catalog& catalog, const SeedProfile& profile,
                           std::size_t m = kDefaultRepresentatives);

}  // namespace explore::coldstart
