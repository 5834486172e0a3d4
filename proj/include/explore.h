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

/* C interface to the explore recommender.
 *
 * Every call returns an explore_status. On failure a message for the calling
 * thread is available from explore_last_error() until the next call on that
 * thread. Strings returned through `char**` are heap-allocated JSON (or text)
 * and must be released with explore_string_free(). Handles are opaque and
 * released with their matching *_free function; passing NULL to a free
 * function is a no-op.
 *
 * Options are JSON objects passed as strings; NULL or "" means defaults.
 */

#ifndef EXPLORE_H_
#define EXPLORE_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define EXPLORE_API __attribute__((visibility("default")))
#else
#define EXPLORE_API
#endif

typedef enum explore_status {
  EXPLORE_OK = 0,
  EXPLORE_INVALID_ARGUMENT = 1,
  EXPLORE_IO = 2,
  EXPLORE_MALFORMED_LINE = 3,
  EXPLORE_EMPTY_INPUT = 4,
  EXPLORE_VERSION_MISMATCH = 5,
  EXPLORE_CORRUPT_FILE = 6,
  EXPLORE_UNKNOWN_USER = 7,
  EXPLORE_UNKNOWN_SONG = 8,
  EXPLORE_INSUFFICIENT_OVERLAP = 9,
  EXPLORE_EMPTY_NEIGHBORHOOD = 10,
  EXPLORE_NO_RATING_SUPPORT = 11,
  EXPLORE_DIVERGENCE_DETECTED = 12,
  EXPLORE_DEGENERATE_DESIGN = 13,
  EXPLORE_NO_REPRESENTATIVES = 14,
  EXPLORE_LENGTH_MISMATCH = 15,
  EXPLORE_NO_USERS = 16,
  EXPLORE_NEGATIVE_GAIN = 17,
  EXPLORE_EMPTY_TEST = 18,
  EXPLORE_CONFIG_MISMATCH = 19,
  EXPLORE_REBUILD_IN_PROGRESS = 20,
  EXPLORE_UNAVAILABLE = 21,
  EXPLORE_INTERNAL = 100
} explore_status;

typedef struct explore_matrix explore_matrix;
typedef struct explore_catalog explore_catalog;
typedef struct explore_snapshot explore_snapshot;
typedef struct explore_server explore_server;

EXPLORE_API const char* explore_version(void);
EXPLORE_API const char* explore_last_error(void);
/* "Ok", "InvalidArgument", ... */
EXPLORE_API const char* explore_status_name(explore_status status);
EXPLORE_API void explore_string_free(char* s);

/* Ratings from a play-event TSV. Options: {"strict": false, "window": 24,
 * "from": <unix s>, "to": <unix s>, "catalog": path}. `report` (nullable)
 * receives counts, dropped users, parse warnings and, with a catalog, how
 * many rated songs have no attributes. */
EXPLORE_API explore_status explore_build_ratings(const char* events_path, const char* options_json,
                                                 explore_matrix** out, char** report);
EXPLORE_API explore_status explore_matrix_load(const char* path, explore_matrix** out);
EXPLORE_API explore_status explore_matrix_save(const explore_matrix* matrix, const char* path);
/* {"users", "songs", "ratings", "synthetic_users"} */
EXPLORE_API explore_status explore_matrix_info(const explore_matrix* matrix, char** out);
EXPLORE_API void explore_matrix_free(explore_matrix* matrix);

/* `warnings` (nullable) receives a JSON array of skipped-row messages. */
EXPLORE_API explore_status explore_catalog_load(const char* path, int strict, explore_catalog** out,
                                                char** warnings);
EXPLORE_API explore_status explore_catalog_size(const explore_catalog* catalog, unsigned long* out);
EXPLORE_API void explore_catalog_free(explore_catalog* catalog);

/* Options: {"cf": {"k", "min_overlap", "keep_negative", "significance_cap"},
 * "precompute_neighbors", "train_mf", "mf": {"factors", "epochs",
 * "learning_rate", "regularization", "init_scale", "seed"}, "ridge_penalty",
 * "built_at", "playlists": {"best_of_2022": path, "best_of_all_time": path}}.
 * `catalog` may be NULL. */
EXPLORE_API explore_status explore_snapshot_build(const explore_matrix* matrix, const explore_catalog* catalog,
                                                  const char* options_json, explore_snapshot** out);
/* Options: {"strict": bool, "config_hash": "<16 hex digits>"}. */
EXPLORE_API explore_status explore_snapshot_load(const char* path, const char* options_json, explore_snapshot** out);
EXPLORE_API explore_status explore_snapshot_save(const explore_snapshot* snapshot, const char* path);
EXPLORE_API explore_status explore_snapshot_info(const explore_snapshot* snapshot, char** out);
/* Hash of the build options, as explore_snapshot_build would record it. */
EXPLORE_API explore_status explore_config_hash(const char* options_json, char** out);
EXPLORE_API void explore_snapshot_free(explore_snapshot* snapshot);

/* Options: {"model": "cf"|"mf"|"oracle"|"random", "split": "stratified"|
 * "global", "train_fraction", "seed", "k", "relevance_threshold",
 * "ap_normalizer": "relevant_in_top_k"|"min_r_k", "cf": {...}, "mf": {...}}.
 * `report_json` and `report_text` are each nullable. */
EXPLORE_API explore_status explore_evaluate(const explore_matrix* matrix, const char* options_json,
                                            char** report_json, char** report_text);

/* Query: JSON object of the HTTP query parameters, e.g. {"k": "5", "source":
 * "nostalgic", "algo": "cf", "energy": "0.8,1.0"}. Output is the
 * recommendations response body. */
EXPLORE_API explore_status explore_recommend(const explore_snapshot* snapshot, const char* user_id,
                                             const char* query_json, char** out);
/* `algo` is "cf" (NEIGHBOR) or "mf" (FEATURE); NULL means "cf". */
EXPLORE_API explore_status explore_explain(const explore_snapshot* snapshot, const char* user_id, const char* song_id,
                                           const char* algo, char** out);
/* Seed CSV text in, new snapshot (with the synthetic user) and the cold-start
 * response body out. `user_id` may be NULL for a content-derived id. */
EXPLORE_API explore_status explore_coldstart(const explore_snapshot* snapshot, const char* seed_csv,
                                             const char* user_id, const char* query_json,
                                             explore_snapshot** out_snapshot, char** out);

/* Server configuration: environment (EXPLORE_SNAPSHOT, EXPLORE_PORT,
 * EXPLORE_HOST, EXPLORE_CATALOG, EXPLORE_PLAYLIST_2022,
 * EXPLORE_PLAYLIST_ALL_TIME), then `config_path` (nullable JSON file), then
 * `overrides_json` with the same keys as the file. */
EXPLORE_API explore_status explore_server_create(const char* config_path, const char* overrides_json,
                                                 explore_server** out);
/* Binds and serves on a background thread; `port` (nullable) receives the
 * bound port. */
EXPLORE_API explore_status explore_server_start(explore_server* server, int* port);
/* Blocks until the server stops. */
EXPLORE_API explore_status explore_server_wait(explore_server* server);
EXPLORE_API explore_status explore_server_stop(explore_server* server);
/* In-process request against the server's current snapshot. */
EXPLORE_API explore_status explore_server_handle(explore_server* server, const char* method, const char* path,
                                                 const char* query_json, const char* body, int* http_status,
                                                 char** response_body);
EXPLORE_API void explore_server_free(explore_server* server);

#ifdef __cplusplus
}
#endif

#endif /* EXPLORE_H_ */
