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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "explore/catalog.hpp"
#include "explore/cf.hpp"
#include "explore/coldstart.hpp"
#include "explore/explain.hpp"
#include "explore/mf.hpp"
#include "explore/rating_matrix.hpp"
#include "explore/selector.hpp"

namespace explore::snapshot {

inline constexpr std::uint16_t kSnapshotFormatVersion = 1;

struct BuildConfig {
  cf::CfConfig cf;
  bool precompute_neighbors = true;
  bool train_mf = true;
  mf::MfConfig mf;
  double ridge_penalty = explain::kDefaultRidgePenalty;

  bool operator==(const BuildConfig&) const = default;
};

// FNV-1a over a canonical rendering of every field.
std::uint64_t config_hash(const BuildConfig& config);

struct Metadata {
  std::uint16_t format_version = kSnapshotFormatVersion;
  std::int64_t built_at = 0;  // Unix seconds; never echoed in responses
  std::uint64_t config_hash = 0;

  bool operator==(const Metadata&) const = default;
};

// Immutable once published; every index refers to `matrix`.
struct ModelSnapshot {
  RatingMatrix matrix;
  BuildConfig config;
  std::vector<cf::NeighborSet> neighbor_index;  // empty unless precomputed
  std::optional<mf::FactorModel> model;
  std::optional<explain::LatentMapper> mapper;
  Catalog catalog;
  std::map<selector::Source, selector::CuratedPlaylist> playlists;
  Metadata metadata;
  std::vector<std::string> warnings;

  selector::SongSources sources() const;
  // Precomputed set when available, computed on demand otherwise. Throws
  // UnknownUser / EmptyNeighborhood.
  cf::NeighborSet neighbor_set(std::size_t user) const;

  bool operator==(const ModelSnapshot&) const = default;
};

// Neighbour index, MF factors and latent mappers for `matrix`. The mapper is
// skipped (with a warning) when the catalog covers too few songs.
ModelSnapshot build_snapshot(RatingMatrix matrix, Catalog catalog,
                             std::map<selector::Source, selector::CuratedPlaylist> playlists,
                             const BuildConfig& config, std::int64_t built_at);

// Snapshot with a cold-start user folded in: neighbour index rebuilt, MF
// user vector solved against the fixed item factors.
struct ColdStartSnapshot {
  ModelSnapshot snapshot;
  coldstart::ColdStartResult result;
};
ColdStartSnapshot with_cold_start_user(const ModelSnapshot& base, const coldstart::SeedProfile& profile,
                                       std::size_t representatives = coldstart::kDefaultRepresentatives);

// "XPLS" file. Loading checks magic and version (VersionMismatch names both
// versions) and payload integrity (CorruptFile). With `expected_hash` set a
// different config hash is refused with ConfigMismatch.
void save_snapshot(const ModelSnapshot& snapshot, std::ostream& out);
void save_snapshot(const ModelSnapshot& snapshot, const std::string& path);
ModelSnapshot load_snapshot(std::istream& in, std::optional<std::uint64_t> expected_hash = std::nullopt);
ModelSnapshot load_snapshot(const std::string& path, std::optional<std::uint64_t> expected_hash = std::nullopt);

}  // namespace explore::snapshot
