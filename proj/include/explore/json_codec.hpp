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

#include <string>
#include <string_view>

#include <json.hpp>

#include "explore/explain.hpp"
#include "explore/metrics.hpp"
#include "explore/selector.hpp"

namespace explore::json {

using nlohmann::json;

// Payload doubles are rounded to 6 decimals so bodies stay stable across
// last-bit differences.
double round6(double x);

std::string url_encode(std::string_view s);

// Entries carry title/artist/genre/attributes when `songs` knows the song,
// and an explanation link when `user_id` is non-empty. `link_query` is
// appended to each link (e.g. "&algo=mf").
json playlist_to_json(const selector::RankedPlaylist& playlist, const selector::SongSources* songs = nullptr,
                      std::string_view user_id = {}, std::string_view link_query = {});

json song_to_json(const SongAttributes& song);

json graph_to_json(const explain::GraphPayload& graph);

json explanation_to_json(const explain::Explanation& explanation);

json report_to_json(const metrics::EvaluationReport& report);
std::string report_to_table(const metrics::EvaluationReport& report);

json error_body(std::string_view code, std::string_view message);

// Compact, key-sorted (nlohmann objects are ordered maps) serialization.
std::string dump(const json& j);

}  // namespace explore::json
