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

#include "explore/service.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "explore/error.hpp"
#include "explore/json_codec.hpp"
#include "text.hpp"

namespace explore::service {
namespace {

using Json = nlohmann::json;

Response ok(const Json& body) { return {200, json::dump(body)}; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::optional<std::string> param(const std::map<std::string, std::string>& q, const std::string& key) {
  const auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

std::size_t user_index(const snapshot::ModelSnapshot& s, std::string_view user_id) {
  const auto u = s.matrix.find_user(user_id);
  if (!u) throw Error(ErrorCode::kUnknownUser, "unknown user '" + std::string(user_id) + "'");
  return *u;
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "cf") return Algorithm::kCf;
  if (s == "mf") return Algorithm::kMf;
  return std::nullopt;
}

std::string_view link_query(Algorithm a) { return a == Algorithm::kMf ? "&algo=mf" : ""; }

Json playlist_body(const snapshot::ModelSnapshot& s, const std::string& user_id, const RecommendQuery& q,
                   const Recommendation& rec) {
  const auto sources = s.sources();
  auto body = json::playlist_to_json(rec.playlist, &sources, user_id, link_query(rec.algo));
  body["user_id"] = user_id;
  body["source"] = selector::source_name(q.source);
  body["algo"] = algorithm_name(rec.algo);
  body["k"] = q.k;
  return body;
}

template <typename Fn>
Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    return {500, json::dump(json::error_body("Internal", e.what()))};
  }
}

Response wrong_method(std::string_view allowed) {
  return {405, json::dump(json::error_body("MethodNotAllowed", "use " + std::string(allowed)))};
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::shared_ptr<const snapshot::ModelSnapshot> SnapshotStore::current() const {
  std::lock_guard lock(mu_);
  return current_;
}

void SnapshotStore::publish(std::shared_ptr<const snapshot::ModelSnapshot> next) {
  std::lock_guard lock(mu_);
  current_.swap(next);
  // `next` now holds the old snapshot; it is released outside readers' view.
}

std::optional<SnapshotStore::RebuildSlot> SnapshotStore::try_begin_rebuild() {
  bool expected = false;
  if (!rebuilding_.compare_exchange_strong(expected, true)) return std::nullopt;
  return RebuildSlot(&rebuilding_);
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownUser:
    case ErrorCode::kUnknownSong:
      return 404;
    case ErrorCode::kRebuildInProgress:
      return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformedLine:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kNoRepresentatives:
    case ErrorCode::kEmptyNeighborhood:
    case ErrorCode::kNoRatingSupport:
    case ErrorCode::kDegenerateDesign:
      return 422;
    case ErrorCode::kUnavailable:
      return 503;
    default:
      return 500;
  }
}

Response error_response(ErrorCode code, std::string_view message) {
  return {http_status(code), json::dump(json::error_body(ErrorCodeName(code), message))};
}

std::string_view algorithm_name(Algorithm a) { return a == Algorithm::kMf ? "mf" : "cf"; }

RecommendQuery parse_recommend_query(const std::map<std::string, std::string>& query) {
  RecommendQuery q;
  if (const auto k = param(query, "k")) {
    const auto v = text::parse_int(*k);
    if (!v || *v < 1 || static_cast<std::size_t>(*v) > kMaxPlaylistSize) {
      throw Error(ErrorCode::kInvalidArgument,
                  "k must be an integer in [1, " + std::to_string(kMaxPlaylistSize) + "], got '" + *k + "'");
    }
    q.k = static_cast<std::size_t>(*v);
  }
  if (const auto s = param(query, "source")) {
    const auto v = selector::parse_source(*s);
    if (!v) throw Error(ErrorCode::kInvalidArgument, "unknown source '" + *s + "'");
    q.source = *v;
  }
  if (const auto a = param(query, "algo")) {
    const auto v = parse_algorithm(*a);
    if (!v) throw Error(ErrorCode::kInvalidArgument, "algo must be cf or mf, got '" + *a + "'");
    q.algo = *v;
  }
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    const auto raw = param(query, std::string(kAttributeNames[i]));
    if (!raw) continue;
    const auto parts = text::split(*raw, ',');
    std::optional<double> lo, hi;
    if (parts.size() == 2) {
      lo = text::parse_double(parts[0]);
      hi = text::parse_double(parts[1]);
    }
    if (!lo || !hi) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(kAttributeNames[i]) + " must be 'lo,hi', got '" + *raw + "'");
    }
    q.filter.ranges[i] = selector::Range{*lo, *hi};
  }
  q.filter.validate();
  return q;
}

Recommendation recommend(const snapshot::ModelSnapshot& s, std::string_view user_id, const RecommendQuery& q) {
  const auto u = user_index(s, user_id);
  Recommendation out;
  out.algo = q.algo;
  std::vector<std::string> warnings;
  std::vector<ScoredSong> pool;
  const auto n_songs = s.matrix.song_count();

  if (q.algo == Algorithm::kCf) {
    try {
      pool = cf::recommend_cf(s.matrix, s.neighbor_set(u), n_songs, true);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyNeighborhood) throw;
      if (s.model) {
        warnings.push_back("CfFallback: no neighbours for this user, ranked by MF");
        out.algo = Algorithm::kMf;
      } else {
        warnings.push_back("EmptyNeighborhood: no neighbours for this user");
      }
    }
  }
  if (out.algo == Algorithm::kMf) {
    if (!s.model) throw Error(ErrorCode::kInvalidArgument, "this snapshot has no MF model");
    pool = mf::recommend_mf(*s.model, s.matrix, u, n_songs, true);
  }

  if (pool.empty()) {
    warnings.push_back("NoCandidates: nothing left to recommend");
    out.playlist.warnings = std::move(warnings);
    return out;
  }
  out.playlist = selector::assemble(s.matrix, pool, s.sources(), q.source, q.filter, q.k);
  warnings.insert(warnings.end(), out.playlist.warnings.begin(), out.playlist.warnings.end());
  out.playlist.warnings = std::move(warnings);
  return out;
}

Response Service::handle(const Request& r) {
  constexpr std::string_view kUsers = "/v1/users/";
  const std::string_view path = r.path;
  const bool get = r.method == "GET";
  const bool post = r.method == "POST";

  if (path == "/v1/health") return get ? health() : wrong_method("GET");
  if (path == "/v1/users:coldstart") {
    return post ? coldstart(r.query, r.body) : wrong_method("POST");
  }
  if (path.starts_with("/v1/songs/") && path.size() > 10) {
    return get ? song(std::string(path.substr(10))) : wrong_method("GET");
  }
  if (path.starts_with(kUsers)) {
    const auto rest = path.substr(kUsers.size());
    for (const std::string_view tail : {"/recommendations", "/explanation"}) {
      if (!ends_with(rest, tail) || rest.size() == tail.size()) continue;
      if (!get) return wrong_method("GET");
      const std::string user(rest.substr(0, rest.size() - tail.size()));
      return tail == "/explanation" ? explanation(user, r.query) : recommendations(user, r.query);
    }
  }
  return {404, json::dump(json::error_body("NotFound", "no route for " + r.method + " " + r.path))};
}

Response Service::health() const {
  const auto s = store_.current();
  if (!s) return ok({{"status", "unavailable"}, {"snapshot", nullptr}});
  Json playlists = Json::array();
  for (const auto& [source, p] : s->playlists) playlists.push_back(selector::source_name(source));
  return ok({{"status", "ok"},
             {"snapshot",
              {{"format_version", s->metadata.format_version},
               {"config_hash", hex64(s->metadata.config_hash)},
               {"users", s->matrix.user_count()},
               {"songs", s->matrix.song_count()},
               {"ratings", s->matrix.nnz()},
               {"catalog_songs", s->catalog.size()},
               {"mf", s->model.has_value()},
               {"feature_explanations", s->mapper.has_value()},
               {"playlists", std::move(playlists)},
               {"warnings", s->warnings}}}});
}

Response Service::recommendations(const std::string& user_id, const std::map<std::string, std::string>& query) const {
  return guarded([&] {
    const auto s = store_.current();
    if (!s) throw Error(ErrorCode::kUnavailable, "no snapshot is loaded");
    const auto q = parse_recommend_query(query);
    return ok(playlist_body(*s, user_id, q, recommend(*s, user_id, q)));
  });
}

Response Service::explanation(const std::string& user_id, const std::map<std::string, std::string>& query) const {
  return guarded([&] {
    const auto s = store_.current();
    if (!s) throw Error(ErrorCode::kUnavailable, "no snapshot is loaded");
    const auto song_id = param(query, "song");
    if (!song_id || song_id->empty()) throw Error(ErrorCode::kInvalidArgument, "missing song parameter");
    auto algo = Algorithm::kCf;
    if (const auto a = param(query, "algo")) {
      const auto v = parse_algorithm(*a);
      if (!v) throw Error(ErrorCode::kInvalidArgument, "algo must be cf or mf, got '" + *a + "'");
      algo = *v;
    }
    const auto u = user_index(*s, user_id);
    const auto song = s->matrix.find_song(*song_id);
    if (!song) throw Error(ErrorCode::kUnknownSong, "unknown song '" + *song_id + "'");

    Json body;
    if (algo == Algorithm::kCf) {
      const auto set = s->neighbor_set(u);
      body = json::explanation_to_json(explain::explain_recommendation_neighbor(s->matrix, set, *song));
      const std::uint32_t rec[] = {static_cast<std::uint32_t>(*song)};
      body["graph"] = json::graph_to_json(explain::neighbor_graph(s->matrix, set, rec, &s->catalog).graph);
    } else {
      if (!s->model || !s->mapper) {
        throw Error(ErrorCode::kInvalidArgument, "this snapshot has no feature explanations");
      }
      body = json::explanation_to_json(
          explain::explain_recommendation_feature(*s->model, *s->mapper, s->matrix, u, *song, kExplanationAttributes));
    }
    body["user_id"] = user_id;
    return ok(body);
  });
}

Response Service::song(const std::string& song_id) const {
  return guarded([&] {
    const auto s = store_.current();
    if (!s) throw Error(ErrorCode::kUnavailable, "no snapshot is loaded");
    const auto sources = s->sources();
    const auto* found = sources.find(song_id);
    if (found == nullptr) throw Error(ErrorCode::kUnknownSong, "unknown song '" + song_id + "'");
    auto body = json::song_to_json(*found);
    body["in_corpus"] = s->matrix.find_song(song_id).has_value();
    return ok(body);
  });
}

Response Service::coldstart(const std::map<std::string, std::string>& query, const std::string& body) {
  return guarded([&] {
    if (!store_.current()) throw Error(ErrorCode::kUnavailable, "no snapshot is loaded");
    const auto q = parse_recommend_query(query);
    std::string user_id = param(query, "user_id").value_or("");
    if (user_id.empty()) {
      std::uint64_t h = 1469598103934665603ULL;
      for (unsigned char c : body) {
        h ^= c;
        h *= 1099511628211ULL;
      }
      user_id = "cold-" + hex64(h);
    }

    auto slot = store_.try_begin_rebuild();
    if (!slot) throw Error(ErrorCode::kRebuildInProgress, "another rebuild is in progress; retry later");
    const auto base = store_.current();

    std::istringstream in(body);
    std::vector<ParseWarning> parse_warnings;
    const auto profile = coldstart::parse_seed_profile(in, user_id, &parse_warnings);
    auto built = snapshot::with_cold_start_user(*base, profile);
    auto next = std::make_shared<const snapshot::ModelSnapshot>(std::move(built.snapshot));
    store_.publish(next);

    Json warnings = Json::array();
    for (const auto& w : parse_warnings) warnings.push_back("line " + std::to_string(w.line) + ": " + w.message);
    for (const auto& w : built.result.warnings) warnings.push_back(w);
    Json affinity = Json::object();
    for (const auto& [genre, w] : built.result.affinity) affinity[genre] = json::round6(w);

    return ok({{"user_id", user_id},
               {"affinity", std::move(affinity)},
               {"seeded_songs", built.result.row.size()},
               {"warnings", std::move(warnings)},
               {"playlist", playlist_body(*next, user_id, q, recommend(*next, user_id, q))}});
  });
}

ServiceConfig config_from_env(const std::function<const char*(const char*)>& getenv_fn) {
  ServiceConfig c;
  auto get = [&](const char* name, std::string& out) {
    if (const char* v = getenv_fn(name); v != nullptr && *v != '\0') out = v;
  };
  get("EXPLORE_SNAPSHOT", c.snapshot_path);
  get("EXPLORE_HOST", c.host);
  get("EXPLORE_CATALOG", c.catalog_path);
  get("EXPLORE_PLAYLIST_2022", c.best_of_2022_path);
  get("EXPLORE_PLAYLIST_ALL_TIME", c.best_of_all_time_path);
  std::string port;
  get("EXPLORE_PORT", port);
  if (!port.empty()) {
    const auto v = text::parse_int(port);
    if (!v || *v < 0 || *v > 65535) throw Error(ErrorCode::kInvalidArgument, "EXPLORE_PORT is not a port: " + port);
    c.port = static_cast<int>(*v);
  }
  return c;
}

ServiceConfig apply_config_file(ServiceConfig c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config '" + path + "' must be a JSON object");
  try {
    if (j.contains("snapshot")) c.snapshot_path = j.at("snapshot").get<std::string>();
    if (j.contains("host")) c.host = j.at("host").get<std::string>();
    if (j.contains("port")) c.port = j.at("port").get<int>();
    if (j.contains("catalog")) c.catalog_path = j.at("catalog").get<std::string>();
    if (j.contains("playlists")) {
      const auto& p = j.at("playlists");
      if (p.contains("best_of_2022")) c.best_of_2022_path = p.at("best_of_2022").get<std::string>();
      if (p.contains("best_of_all_time")) c.best_of_all_time_path = p.at("best_of_all_time").get<std::string>();
    }
    if (j.contains("strict")) c.strict = j.at("strict").get<bool>();
    if (j.contains("config_hash")) c.expected_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "config '" + path + "': " + e.what());
  }
  if (c.port < 0 || c.port > 65535) throw Error(ErrorCode::kInvalidArgument, "config port out of range");
  return c;
}

std::shared_ptr<const snapshot::ModelSnapshot> load_for_serving(const ServiceConfig& config) {
  if (config.snapshot_path.empty()) return nullptr;
  auto s = snapshot::load_snapshot(config.snapshot_path,
                                   config.strict ? config.expected_hash : std::optional<std::uint64_t>{});
  if (!config.catalog_path.empty()) {
    s.catalog = load_catalog(config.catalog_path).catalog;
    if (s.model) {
      s.mapper.reset();
      try {
        s.mapper = explain::fit_latent_mappers(*s.model, s.matrix, s.catalog, s.config.ridge_penalty);
      } catch (const Error& e) {
        s.warnings.push_back(std::string(ErrorCodeName(e.code())) + ": feature explanations disabled: " + e.what());
      }
    }
  }
  if (!config.best_of_2022_path.empty()) {
    s.playlists[selector::Source::kBestOf2022] =
        selector::load_curated_playlist(config.best_of_2022_path, "best_of_2022");
  }
  if (!config.best_of_all_time_path.empty()) {
    s.playlists[selector::Source::kBestOfAllTime] =
        selector::load_curated_playlist(config.best_of_all_time_path, "best_of_all_time");
  }
  return std::make_shared<const snapshot::ModelSnapshot>(std::move(s));
}

}  // namespace explore::service
