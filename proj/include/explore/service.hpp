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

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "explore/error.hpp"
#include "explore/snapshot.hpp"

namespace explore::service {

// Readers take a reference to the published snapshot and keep it alive for
// as long as they use it. Builders work off to the side and publish with a
// pointer swap; at most one builder holds the rebuild slot.
class SnapshotStore {
 public:
  SnapshotStore() = default;
  explicit SnapshotStore(std::shared_ptr<const snapshot::ModelSnapshot> initial) : current_(std::move(initial)) {}

  std::shared_ptr<const snapshot::ModelSnapshot> current() const;
  void publish(std::shared_ptr<const snapshot::ModelSnapshot> next);

  class RebuildSlot {
   public:
    explicit RebuildSlot(std::atomic<bool>* flag) : flag_(flag) {}
    RebuildSlot(RebuildSlot&& other) noexcept : flag_(std::exchange(other.flag_, nullptr)) {}
    RebuildSlot& operator=(RebuildSlot&&) = delete;
    ~RebuildSlot() {
      if (flag_ != nullptr) flag_->store(false);
    }

   private:
    std::atomic<bool>* flag_;
  };

  // nullopt when another rebuild is running.
  std::optional<RebuildSlot> try_begin_rebuild();

 private:
  mutable std::mutex mu_;  // guards the pointer copy only
  std::shared_ptr<const snapshot::ModelSnapshot> current_;
  std::atomic<bool> rebuilding_{false};
};

struct Request {
  std::string method;  // "GET" | "POST"
  std::string path;    // without the query string
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;  // JSON
};

// 404 UnknownUser/UnknownSong, 409 RebuildInProgress, 422 malformed input,
// 503 Unavailable, 500 otherwise.
int http_status(ErrorCode code);
Response error_response(ErrorCode code, std::string_view message);

inline constexpr std::size_t kDefaultPlaylistSize = 10;
inline constexpr std::size_t kMaxPlaylistSize = 1000;

enum class Algorithm { kCf, kMf };

struct RecommendQuery {
  std::size_t k = kDefaultPlaylistSize;
  selector::Source source = selector::Source::kNostalgic;
  Algorithm algo = Algorithm::kCf;
  selector::MoodFilter filter;
};

// Reads `k`, `source`, `algo` and `<attribute>=lo,hi`. Throws
// InvalidArgument on malformed values.
RecommendQuery parse_recommend_query(const std::map<std::string, std::string>& query);

std::string_view algorithm_name(Algorithm a);  // "cf" | "mf"

struct Recommendation {
  selector::RankedPlaylist playlist;
  Algorithm algo = Algorithm::kCf;  // what actually ranked the pool
};

// Full candidate pool for the user, then selector::assemble. CF falls back
// to MF (with a CfFallback warning) for a user without neighbours. Throws
// UnknownUser.
Recommendation recommend(const snapshot::ModelSnapshot& s, std::string_view user_id, const RecommendQuery& q);

inline constexpr std::size_t kExplanationAttributes = 3;

// Every route is a pure function of (published snapshot, request).
class Service {
 public:
  explicit Service(SnapshotStore& store) : store_(store) {}

  Response handle(const Request& request);

  Response health() const;
  Response recommendations(const std::string& user_id, const std::map<std::string, std::string>& query) const;
  Response explanation(const std::string& user_id, const std::map<std::string, std::string>& query) const;
  Response song(const std::string& song_id) const;
  Response coldstart(const std::map<std::string, std::string>& query, const std::string& body);

  SnapshotStore& store() { return store_; }

 private:
  SnapshotStore& store_;
};

struct ServiceConfig {
  std::string snapshot_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string catalog_path;
  std::string best_of_2022_path;
  std::string best_of_all_time_path;
  bool strict = false;  // refuse snapshots whose config hash differs from `expected_hash`
  std::optional<std::uint64_t> expected_hash;
};

// EXPLORE_SNAPSHOT, EXPLORE_PORT, EXPLORE_HOST, EXPLORE_CATALOG,
// EXPLORE_PLAYLIST_2022, EXPLORE_PLAYLIST_ALL_TIME.
ServiceConfig config_from_env(const std::function<const char*(const char*)>& getenv_fn);
// JSON object with keys snapshot, host, port, catalog, playlists.best_of_2022,
// playlists.best_of_all_time, strict, config_hash; present keys win.
ServiceConfig apply_config_file(ServiceConfig base, const std::string& path);

// Loads the snapshot named by the config (if any) and swaps in catalog and
// playlists given by path. Throws on unreadable inputs.
std::shared_ptr<const snapshot::ModelSnapshot> load_for_serving(const ServiceConfig& config);

// Blocks until `stop` is called from another thread (or the listener fails).
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port; returns the bound port or -1.
  int bind(const std::string& host, int port);
  bool listen();  // after bind
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace explore::service
