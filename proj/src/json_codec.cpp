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

#include "explore/json_codec.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace explore::json {
namespace {

std::string_view kind_name(explain::ExplanationKind k) {
  return k == explain::ExplanationKind::kFeature ? "FEATURE" : "NEIGHBOR";
}

std::string fixed(double x, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << x;
  return out.str();
}

}  // namespace

double round6(double x) {
  if (!std::isfinite(x)) return x;
  const double r = std::round(x * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0.0" in payloads
}

std::string url_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

json song_to_json(const SongAttributes& song) {
  json attrs = json::object();
  const auto f = song.features();
  for (std::size_t a = 0; a < kAttributeCount; ++a) attrs[std::string(kAttributeNames[a])] = round6(f[a]);
  return {{"song_id", song.song_id},
          {"title", song.title},
          {"artist", song.artist},
          {"genre", song.genre},
          {"attributes", std::move(attrs)}};
}

json playlist_to_json(const selector::RankedPlaylist& playlist, const selector::SongSources* songs,
                      std::string_view user_id, std::string_view link_query) {
  json entries = json::array();
  for (const auto& e : playlist.entries) {
    json j = {{"rank", e.rank},
              {"song_id", e.song_id},
              {"score", round6(e.score)},
              {"source", e.source == selector::EntrySource::kCorpus ? "CORPUS" : "CROSSWALK"},
              {"provenance", e.provenance ? json(*e.provenance) : json(nullptr)},
              {"relaxed", e.relaxed}};
    if (songs != nullptr) {
      if (const auto* s = songs->find(e.song_id)) {
        const auto song = song_to_json(*s);
        j["title"] = song["title"];
        j["artist"] = song["artist"];
        j["genre"] = song["genre"];
        j["attributes"] = song["attributes"];
      }
    }
    if (!user_id.empty()) {
      j["explanation"] = "/v1/users/" + url_encode(user_id) + "/explanation?song=" + url_encode(e.explain_song) +
                       std::string(link_query);
    }
    entries.push_back(std::move(j));
  }
  return {{"entries", std::move(entries)}, {"warnings", playlist.warnings}};
}

json graph_to_json(const explain::GraphPayload& graph) {
  json nodes = json::array(), edges = json::array();
  for (const auto& n : graph.nodes) nodes.push_back({{"id", n.id}, {"kind", n.kind}, {"label", n.label}});
  for (const auto& e : graph.edges) {
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"weight", round6(e.weight)}, {"kind", e.kind}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

json explanation_to_json(const explain::Explanation& x) {
  json j = {{"kind", kind_name(x.kind)}, {"song_id", x.song_id}};
  if (x.kind == explain::ExplanationKind::kFeature) {
    json attrs = json::array();
    for (const auto& a : x.attributes) attrs.push_back({{"name", a.attribute}, {"importance", round6(a.importance)}});
    j["latent_dimension"] = x.latent_dimension;
    j["contribution"] = round6(x.contribution);
    j["attributes"] = std::move(attrs);
  } else {
    json ns = json::array();
    for (const auto& n : x.neighbors) {
      ns.push_back({{"user_id", n.user_id},
                    {"similarity", round6(n.similarity)},
                    {"weight", round6(n.weight)},
                    {"rating", round6(n.rating)}});
    }
    j["neighbors"] = std::move(ns);
  }
  return j;
}

json report_to_json(const metrics::EvaluationReport& r) {
  json users = json::array();
  for (const auto& u : r.per_user) {
    users.push_back({{"user_id", u.user_id},
                     {"test_count", u.test_count},
                     {"relevant_count", u.relevant_count},
                     {"average_precision", round6(u.average_precision)},
                     {"ndcg", round6(u.ndcg)}});
  }
  return {{"model", metrics::model_name(r.model)},
          {"split",
           {{"strategy", metrics::strategy_name(r.split.strategy)},
            {"train_fraction", r.split.train_fraction},
            {"seed", r.split.seed}}},
          {"k", r.k},
          {"relevance_threshold", r.relevance_threshold},
          {"ap_normalizer", r.ap_normalizer == metrics::ApNormalizer::kRelevantInTopK ? "relevant_in_top_k" : "min_r_k"},
          {"train_entries", r.train_entries},
          {"test_entries", r.test_entries},
          {"rmse", round6(r.rmse)},
          {"rmse_fallbacks", r.rmse_fallbacks},
          {"map_at_k", round6(r.map_at_k)},
          {"mean_ndcg", round6(r.mean_ndcg)},
          {"users_evaluated", r.per_user.size()},
          {"per_user", std::move(users)}};
}

std::string report_to_table(const metrics::EvaluationReport& r) {
  std::ostringstream out;
  const std::string k = std::to_string(r.k);
  out << "model      " << metrics::model_name(r.model) << "\n"
      << "split      " << metrics::strategy_name(r.split.strategy) << " (train " << fixed(r.split.train_fraction, 2)
      << ", seed " << r.split.seed << ")\n"
      << "entries    train " << r.train_entries << ", test " << r.test_entries << "\n"
      << "RMSE       " << fixed(r.rmse, 6) << "\n"
      << "MAP@" << k << std::string(k.size() < 6 ? 6 - k.size() : 1, ' ') << " " << fixed(r.map_at_k, 6) << "\n"
      << "NDCG@" << k << std::string(k.size() < 5 ? 5 - k.size() : 1, ' ') << " " << fixed(r.mean_ndcg, 6) << "\n\n";

  std::size_t width = 4;
  for (const auto& u : r.per_user) width = std::max(width, u.user_id.size());
  out << std::left << std::setw(static_cast<int>(width)) << "user" << "  " << std::right << std::setw(5) << "test"
      << "  " << std::setw(8) << "relevant" << "  " << std::setw(8) << "AP" << "  " << std::setw(8) << "NDCG" << "\n";
  for (const auto& u : r.per_user) {
    out << std::left << std::setw(static_cast<int>(width)) << u.user_id << "  " << std::right << std::setw(5)
        << u.test_count << "  " << std::setw(8) << u.relevant_count << "  " << std::setw(8)
        << fixed(u.average_precision, 4) << "  " << std::setw(8) << fixed(u.ndcg, 4) << "\n";
  }
  return out.str();
}

json error_body(std::string_view code, std::string_view message) { return {{"code", code}, {"message", message}}; }

std::string dump(const json& j) { return j.dump(); }

}  // namespace explore::json
