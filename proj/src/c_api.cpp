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

#include "explore.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "explore/error.hpp"
#include "explore/ingest.hpp"
#include "explore/json_codec.hpp"
#include "explore/metrics.hpp"
#include "explore/service.hpp"
#include "explore/snapshot.hpp"

using Json = nlohmann::json;
using namespace explore;

struct explore_matrix {
  RatingMatrix matrix;
};

struct explore_catalog {
  Catalog catalog;
};

struct explore_snapshot {
  std::shared_ptr<const snapshot::ModelSnapshot> snapshot;
};

struct explore_server {
  service::ServiceConfig config;
  service::SnapshotStore store;
  service::Service service{store};
  service::HttpServer http{service};
  std::thread loop;
  bool running = false;
};

namespace {

thread_local std::string g_last_error;

explore_status fail(explore_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
explore_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return EXPLORE_OK;
  } catch (const Error& e) {
    return fail(static_cast<explore_status>(e.code()), e.what());
  } catch (const Json::exception& e) {
    return fail(EXPLORE_INVALID_ARGUMENT, std::string("bad options: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(EXPLORE_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EXPLORE_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  if (out != nullptr) *out = dup(s);
}

Json options(const char* text) {
  if (text == nullptr || *text == '\0') return Json::object();
  auto j = Json::parse(text);
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "options must be a JSON object");
  return j;
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

cf::CfConfig cf_config(const Json& j) {
  cf::CfConfig c;
  read(j, "k", c.k);
  read(j, "min_overlap", c.min_overlap);
  read(j, "keep_negative", c.keep_negative);
  read(j, "significance_cap", c.significance_cap);
  return c;
}

mf::MfConfig mf_config(const Json& j) {
  mf::MfConfig c;
  read(j, "factors", c.factors);
  read(j, "epochs", c.epochs);
  read(j, "learning_rate", c.learning_rate);
  read(j, "regularization", c.regularization);
  read(j, "init_scale", c.init_scale);
  read(j, "seed", c.seed);
  return c;
}

snapshot::BuildConfig build_config(const Json& j) {
  snapshot::BuildConfig c;
  if (j.contains("cf")) c.cf = cf_config(j.at("cf"));
  if (j.contains("mf")) c.mf = mf_config(j.at("mf"));
  read(j, "precompute_neighbors", c.precompute_neighbors);
  read(j, "train_mf", c.train_mf);
  read(j, "ridge_penalty", c.ridge_penalty);
  return c;
}

std::map<std::string, std::string> query_map(const char* text) {
  std::map<std::string, std::string> out;
  const auto j = options(text);
  for (const auto& [key, value] : j.items()) {
    out[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

explore_status from_response(const service::Response& r, char** out) {
  emit(out, r.body);
  if (r.status == 200) return EXPLORE_OK;
  const auto body = Json::parse(r.body, nullptr, false);
  std::string message = r.body;
  std::string code;
  if (body.is_object()) {
    message = body.value("message", r.body);
    code = body.value("code", "");
  }
  for (int c = 1; c <= static_cast<int>(ErrorCode::kUnavailable); ++c) {
    if (ErrorCodeName(static_cast<ErrorCode>(c)) == code) return fail(static_cast<explore_status>(c), message);
  }
  return fail(EXPLORE_INTERNAL, message);
}

Json warnings_json(const std::vector<ParseWarning>& warnings) {
  Json out = Json::array();
  for (const auto& w : warnings) out.push_back("line " + std::to_string(w.line) + ": " + w.message);
  return out;
}

}  // namespace

extern "C" {

const char* explore_version(void) { return EXPLORE_VERSION_STRING; }

const char* explore_last_error(void) { return g_last_error.c_str(); }

const char* explore_status_name(explore_status status) {
  if (status == EXPLORE_OK) return "Ok";
  if (status == EXPLORE_INTERNAL) return "Internal";
  const auto name = ErrorCodeName(static_cast<ErrorCode>(status));
  return name.data();  // literals, NUL-terminated
}

void explore_string_free(char* s) { std::free(s); }

explore_status explore_build_ratings(const char* events_path, const char* options_json, explore_matrix** out,
                                     char** report) {
  return guarded([&] {
    require(events_path, "events_path");
    require(out, "out");
    const auto opts = options(options_json);
    std::ifstream in(events_path);
    if (!in) throw Error(ErrorCode::kIo, std::string("cannot open events '") + events_path + "'");
    const auto parsed = ingest::parse_events(in, opts.value("strict", false));
    ingest::RatingBuildOptions build;
    read(opts, "window", build.window);
    if (opts.contains("from")) build.from_timestamp = opts.at("from").get<std::int64_t>();
    if (opts.contains("to")) build.to_timestamp = opts.at("to").get<std::int64_t>();
    auto result = ingest::build_rating_matrix(parsed.events, build);
    const auto& r = result.report;
    char month[16];
    std::snprintf(month, sizeof month, "%04d-%02d", r.latest_month.year, r.latest_month.month);
    Json j = {{"events_in", r.events_in},
              {"events_used", r.events_used},
              {"users_seen", r.users_seen},
              {"latest_month", month},
              {"dropped_users", r.dropped_users},
              {"users", result.matrix.user_count()},
              {"songs", result.matrix.song_count()},
              {"ratings", result.matrix.nnz()},
              {"warnings", warnings_json(parsed.warnings)}};
    if (opts.contains("catalog")) {
      const auto catalog = load_catalog(opts.at("catalog").get<std::string>()).catalog;
      std::size_t missing = 0;
      for (const auto& sid : result.matrix.songs()) missing += catalog.find(sid) == nullptr;
      j["songs_without_attributes"] = missing;
    }
    *out = new explore_matrix{std::move(result.matrix)};
    emit(report, j.dump());
  });
}

explore_status explore_matrix_load(const char* path, explore_matrix** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new explore_matrix{read_matrix(std::string(path))};
  });
}

explore_status explore_matrix_save(const explore_matrix* matrix, const char* path) {
  return guarded([&] {
    require(matrix, "matrix");
    require(path, "path");
    write_matrix(matrix->matrix, std::string(path));
  });
}

explore_status explore_matrix_info(const explore_matrix* matrix, char** out) {
  return guarded([&] {
    require(matrix, "matrix");
    require(out, "out");
    const auto& m = matrix->matrix;
    std::size_t synthetic = 0;
    for (std::size_t u = 0; u < m.user_count(); ++u) synthetic += m.is_synthetic(u);
    emit(out, Json{{"users", m.user_count()}, {"songs", m.song_count()}, {"ratings", m.nnz()},
                   {"synthetic_users", synthetic}}
                  .dump());
  });
}

void explore_matrix_free(explore_matrix* matrix) { delete matrix; }

explore_status explore_catalog_load(const char* path, int strict, explore_catalog** out, char** warnings) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto parsed = load_catalog(path, strict != 0);
    *out = new explore_catalog{std::move(parsed.catalog)};
    emit(warnings, warnings_json(parsed.warnings).dump());
  });
}

explore_status explore_catalog_size(const explore_catalog* catalog, unsigned long* out) {
  return guarded([&] {
    require(catalog, "catalog");
    require(out, "out");
    *out = catalog->catalog.size();
  });
}

void explore_catalog_free(explore_catalog* catalog) { delete catalog; }

explore_status explore_snapshot_build(const explore_matrix* matrix, const explore_catalog* catalog,
                                      const char* options_json, explore_snapshot** out) {
  return guarded([&] {
    require(matrix, "matrix");
    require(out, "out");
    const auto opts = options(options_json);
    std::map<selector::Source, selector::CuratedPlaylist> playlists;
    if (opts.contains("playlists")) {
      const auto& p = opts.at("playlists");
      if (p.contains("best_of_2022")) {
        playlists[selector::Source::kBestOf2022] =
            selector::load_curated_playlist(p.at("best_of_2022").get<std::string>(), "best_of_2022");
      }
      if (p.contains("best_of_all_time")) {
        playlists[selector::Source::kBestOfAllTime] =
            selector::load_curated_playlist(p.at("best_of_all_time").get<std::string>(), "best_of_all_time");
      }
    }
    auto s = snapshot::build_snapshot(matrix->matrix, catalog != nullptr ? catalog->catalog : Catalog{},
                                      std::move(playlists), build_config(opts),
                                      opts.value("built_at", std::int64_t{0}));
    *out = new explore_snapshot{std::make_shared<const snapshot::ModelSnapshot>(std::move(s))};
  });
}

explore_status explore_snapshot_load(const char* path, const char* options_json, explore_snapshot** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const auto opts = options(options_json);
    std::optional<std::uint64_t> expected;
    if (opts.value("strict", false)) {
      if (!opts.contains("config_hash")) throw Error(ErrorCode::kInvalidArgument, "strict load needs config_hash");
      expected = std::stoull(opts.at("config_hash").get<std::string>(), nullptr, 16);
    }
    *out = new explore_snapshot{
        std::make_shared<const snapshot::ModelSnapshot>(snapshot::load_snapshot(std::string(path), expected))};
  });
}

explore_status explore_snapshot_save(const explore_snapshot* snapshot, const char* path) {
  return guarded([&] {
    require(snapshot, "snapshot");
    require(path, "path");
    snapshot::save_snapshot(*snapshot->snapshot, std::string(path));
  });
}

explore_status explore_snapshot_info(const explore_snapshot* snapshot, char** out) {
  return guarded([&] {
    require(snapshot, "snapshot");
    require(out, "out");
    const auto& s = *snapshot->snapshot;
    Json playlists = Json::array();
    for (const auto& [source, p] : s.playlists) playlists.push_back(selector::source_name(source));
    emit(out, Json{{"format_version", s.metadata.format_version},
                   {"config_hash", hex64(s.metadata.config_hash)},
                   {"built_at", s.metadata.built_at},
                   {"users", s.matrix.user_count()},
                   {"songs", s.matrix.song_count()},
                   {"ratings", s.matrix.nnz()},
                   {"catalog_songs", s.catalog.size()},
                   {"neighbor_index", !s.neighbor_index.empty()},
                   {"mf", s.model.has_value()},
                   {"mf_final_rmse", s.model && !s.model->training_log.empty()
                                         ? Json(json::round6(s.model->training_log.back()))
                                         : Json(nullptr)},
                   {"feature_explanations", s.mapper.has_value()},
                   {"playlists", std::move(playlists)},
                   {"warnings", s.warnings}}
                  .dump());
  });
}

explore_status explore_config_hash(const char* options_json, char** out) {
  return guarded([&] {
    require(out, "out");
    emit(out, hex64(snapshot::config_hash(build_config(options(options_json)))));
  });
}

void explore_snapshot_free(explore_snapshot* snapshot) { delete snapshot; }

explore_status explore_evaluate(const explore_matrix* matrix, const char* options_json, char** report_json,
                                char** report_text) {
  return guarded([&] {
    require(matrix, "matrix");
    const auto opts = options(options_json);
    const auto model_name = opts.value("model", std::string("cf"));
    const auto model = metrics::parse_model(model_name);
    if (!model) throw Error(ErrorCode::kInvalidArgument, "unknown model '" + model_name + "'");
    metrics::SplitSpec spec;
    const auto split_name = opts.value("split", std::string("stratified"));
    const auto strategy = metrics::parse_strategy(split_name);
    if (!strategy) throw Error(ErrorCode::kInvalidArgument, "unknown split '" + split_name + "'");
    spec.strategy = *strategy;
    read(opts, "train_fraction", spec.train_fraction);
    read(opts, "seed", spec.seed);
    metrics::EvalConfig config;
    if (opts.contains("cf")) config.cf = cf_config(opts.at("cf"));
    if (opts.contains("mf")) config.mf = mf_config(opts.at("mf"));
    const auto normalizer = opts.value("ap_normalizer", std::string("relevant_in_top_k"));
    if (normalizer == "min_r_k") {
      config.ap_normalizer = metrics::ApNormalizer::kMinRelevantK;
    } else if (normalizer != "relevant_in_top_k") {
      throw Error(ErrorCode::kInvalidArgument, "unknown ap_normalizer '" + normalizer + "'");
    }
    const auto k = opts.value("k", std::size_t{3});
    const auto threshold = opts.value("relevance_threshold", metrics::kDefaultRelevanceThreshold);
    const auto report = metrics::evaluate(*model, matrix->matrix, spec, k, threshold, config);
    emit(report_json, json::report_to_json(report).dump(2));
    emit(report_text, json::report_to_table(report));
  });
}

explore_status explore_recommend(const explore_snapshot* snapshot, const char* user_id, const char* query_json,
                                 char** out) {
  explore_status status = EXPLORE_OK;
  const auto outer = guarded([&] {
    require(snapshot, "snapshot");
    require(user_id, "user_id");
    service::SnapshotStore store(snapshot->snapshot);
    service::Service svc(store);
    status = from_response(svc.recommendations(user_id, query_map(query_json)), out);
  });
  return outer != EXPLORE_OK ? outer : status;
}

explore_status explore_explain(const explore_snapshot* snapshot, const char* user_id, const char* song_id,
                               const char* algo, char** out) {
  explore_status status = EXPLORE_OK;
  const auto outer = guarded([&] {
    require(snapshot, "snapshot");
    require(user_id, "user_id");
    require(song_id, "song_id");
    service::SnapshotStore store(snapshot->snapshot);
    service::Service svc(store);
    std::map<std::string, std::string> q = {{"song", song_id}};
    if (algo != nullptr) q["algo"] = algo;
    status = from_response(svc.explanation(user_id, q), out);
  });
  return outer != EXPLORE_OK ? outer : status;
}

explore_status explore_coldstart(const explore_snapshot* snapshot, const char* seed_csv, const char* user_id,
                                 const char* query_json, explore_snapshot** out_snapshot, char** out) {
  explore_status status = EXPLORE_OK;
  const auto outer = guarded([&] {
    require(snapshot, "snapshot");
    require(seed_csv, "seed_csv");
    service::SnapshotStore store(snapshot->snapshot);
    service::Service svc(store);
    auto q = query_map(query_json);
    if (user_id != nullptr) q["user_id"] = user_id;
    status = from_response(svc.coldstart(q, seed_csv), out);
    if (status == EXPLORE_OK && out_snapshot != nullptr) *out_snapshot = new explore_snapshot{store.current()};
  });
  return outer != EXPLORE_OK ? outer : status;
}

explore_status explore_server_create(const char* config_path, const char* overrides_json, explore_server** out) {
  return guarded([&] {
    require(out, "out");
    auto config = service::config_from_env([](const char* name) { return std::getenv(name); });
    if (config_path != nullptr && *config_path != '\0') config = service::apply_config_file(config, config_path);
    if (overrides_json != nullptr && *overrides_json != '\0') {
      const auto o = options(overrides_json);
      read(o, "snapshot", config.snapshot_path);
      read(o, "host", config.host);
      read(o, "port", config.port);
      read(o, "catalog", config.catalog_path);
      if (o.contains("playlists")) {
        read(o.at("playlists"), "best_of_2022", config.best_of_2022_path);
        read(o.at("playlists"), "best_of_all_time", config.best_of_all_time_path);
      }
      read(o, "strict", config.strict);
      if (o.contains("config_hash")) {
        config.expected_hash = std::stoull(o.at("config_hash").get<std::string>(), nullptr, 16);
      }
    }
    if (config.strict && !config.expected_hash) {
      throw Error(ErrorCode::kInvalidArgument, "strict mode needs an expected config hash");
    }
    auto server = std::make_unique<explore_server>();
    server->config = config;
    server->store.publish(service::load_for_serving(config));
    *out = server.release();
  });
}

explore_status explore_server_start(explore_server* server, int* port) {
  return guarded([&] {
    require(server, "server");
    if (server->running) throw Error(ErrorCode::kInvalidArgument, "server already started");
    const int bound = server->http.bind(server->config.host, server->config.port);
    if (bound <= 0) {
      throw Error(ErrorCode::kIo, "cannot listen on " + server->config.host + ":" +
                                      std::to_string(server->config.port));
    }
    server->loop = std::thread([server] { server->http.listen(); });
    server->http.wait_until_ready();
    server->running = true;
    if (port != nullptr) *port = bound;
  });
}

explore_status explore_server_wait(explore_server* server) {
  return guarded([&] {
    require(server, "server");
    if (server->loop.joinable()) server->loop.join();
    server->running = false;
  });
}

explore_status explore_server_stop(explore_server* server) {
  return guarded([&] {
    require(server, "server");
    server->http.stop();
    if (server->loop.joinable()) server->loop.join();
    server->running = false;
  });
}

explore_status explore_server_handle(explore_server* server, const char* method, const char* path,
                                     const char* query_json, const char* body, int* http_status,
                                     char** response_body) {
  return guarded([&] {
    require(server, "server");
    require(method, "method");
    require(path, "path");
    const auto r = server->service.handle({method, path, query_map(query_json), body != nullptr ? body : ""});
    if (http_status != nullptr) *http_status = r.status;
    emit(response_body, r.body);
  });
}

void explore_server_free(explore_server* server) {
  if (server == nullptr) return;
  server->http.stop();
  if (server->loop.joinable()) server->loop.join();
  delete server;
}

}  // extern "C"
