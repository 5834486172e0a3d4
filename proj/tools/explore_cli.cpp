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

// Command-line front end. Talks to the library through the C interface only.

#include <explore.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <string>
#include <vector>

using Json = nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

int g_verbosity = 1;  // 0 quiet, 1 info, 2 debug

std::string quoted(const std::string& s) { return Json(s).dump(); }

void log(int level, const std::string& cmd, const std::string& msg) {
  if (level > g_verbosity) return;
  std::cerr << "level=" << (level >= 2 ? "debug" : "info") << " cmd=" << cmd << " msg=" << quoted(msg) << "\n";
}

// Data errors carry the library status so the message names the failing step.
struct Failure {
  explore_status status;
  std::string what;
};

void check(explore_status s, const std::string& what) {
  if (s != EXPLORE_OK) throw Failure{s, what + ": " + explore_last_error()};
}

// Owns a string returned by the library.
class Text {
 public:
  Text() = default;
  ~Text() { explore_string_free(p_); }
  Text(const Text&) = delete;
  Text& operator=(const Text&) = delete;
  char** out() { return &p_; }
  std::string str() const { return p_ != nullptr ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  ~Handle() { Free(p_); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  T** out() { return &p_; }
  T* get() const { return p_; }

 private:
  T* p_ = nullptr;
};

using Matrix = Handle<explore_matrix, explore_matrix_free>;
using Catalog = Handle<explore_catalog, explore_catalog_free>;
using Snapshot = Handle<explore_snapshot, explore_snapshot_free>;
using Server = Handle<explore_server, explore_server_free>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{EXPLORE_IO, "cannot open '" + path + "'"};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Results go to --out when given, stdout otherwise.
void write_result(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
  if (!out) throw Failure{EXPLORE_IO, "cannot write '" + out_path + "'"};
}

std::int64_t default_built_at() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    return std::strtoll(epoch, nullptr, 10);
  }
  return static_cast<std::int64_t>(std::time(nullptr));
}

struct CfFlags {
  int k = 30;
  int min_overlap = 3;
  int significance_cap = 50;
  bool positive_only = false;

  void add(CLI::App* app) {
    app->add_option("--neighbors", k, "Neighbourhood size k")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--min-overlap", min_overlap, "Co-rated songs needed for a similarity")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--significance-cap", significance_cap, "Shrinkage cap on the co-rated count (0 disables)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_flag("--positive-only", positive_only, "Keep only positively correlated neighbours");
  }
  Json json() const {
    return {{"k", k}, {"min_overlap", min_overlap}, {"significance_cap", significance_cap},
            {"keep_negative", !positive_only}};
  }
};

struct MfFlags {
  int factors = 32;
  int epochs = 50;
  double learning_rate = 0.005;
  double regularization = 0.02;
  double init_scale = 0.05;

  void add(CLI::App* app) {
    app->add_option("--factors", factors, "Latent dimension d")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--epochs", epochs, "SGD epochs")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lr", learning_rate, "SGD learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--reg", regularization, "L2 penalty")->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--init-scale", init_scale, "Factors start in U(-s, s)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }
  Json json(std::uint64_t seed) const {
    return {{"factors", factors},
            {"epochs", epochs},
            {"learning_rate", learning_rate},
            {"regularization", regularization},
            {"init_scale", init_scale},
            {"seed", seed}};
  }
};

// `--<attribute> lo,hi` pass through as query parameters.
struct FilterFlags {
  static constexpr const char* kNames[] = {"danceability", "energy", "instrumentalness", "liveness",
                                           "duration_minutes"};
  std::string ranges[5];

  void add(CLI::App* app) {
    for (int i = 0; i < 5; ++i) {
      app->add_option(std::string("--") + kNames[i], ranges[i],
                      std::string("Keep songs with ") + kNames[i] + " in [lo,hi], given as lo,hi");
    }
  }
  void into(Json& query) const {
    for (int i = 0; i < 5; ++i) {
      if (!ranges[i].empty()) query[kNames[i]] = ranges[i];
    }
  }
};

struct Opts {
  std::uint64_t seed = 42;
  int verbose = 0;
  bool quiet = false;
};

int run_build_ratings(const std::string& events, const std::string& catalog, const std::string& out, bool strict,
                      int window, const std::optional<std::int64_t>& from, const std::optional<std::int64_t>& to) {
  Json o = {{"strict", strict}, {"window", window}};
  if (from) o["from"] = *from;
  if (to) o["to"] = *to;
  if (!catalog.empty()) o["catalog"] = catalog;
  Matrix m;
  Text report;
  check(explore_build_ratings(events.c_str(), o.dump().c_str(), m.out(), report.out()), "build-ratings");
  check(explore_matrix_save(m.get(), out.c_str()), "write matrix");
  const auto r = Json::parse(report.str());
  for (const auto& w : r.at("warnings")) log(1, "build-ratings", "skipped " + w.get<std::string>());
  if (r.contains("songs_without_attributes") && r.at("songs_without_attributes").get<int>() > 0) {
    log(1, "build-ratings",
        std::to_string(r.at("songs_without_attributes").get<int>()) + " rated songs have no catalog attributes");
  }
  log(1, "build-ratings", "wrote " + out);
  std::cout << r.dump(2) << "\n";
  return 0;
}

int run_serve(const std::string& config, const Json& overrides) {
  // Block the stop signals before any server thread exists so they reach
  // sigwait below and nowhere else.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  Server server;
  check(explore_server_create(config.empty() ? nullptr : config.c_str(), overrides.dump().c_str(), server.out()),
        "serve");
  int port = 0;
  check(explore_server_start(server.get(), &port), "serve");
  log(1, "serve", "listening on port " + std::to_string(port));
  int sig = 0;
  sigwait(&stop_signals, &sig);
  log(1, "serve", "signal " + std::to_string(sig) + ", stopping");
  check(explore_server_stop(server.get()), "serve");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable song recommender"};
  app.set_version_flag("--version", std::string(explore_version()));
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  Opts opts;
  app.add_option("--seed", opts.seed, "Root seed for every random choice")->capture_default_str();
  app.add_flag("-v,--verbose", opts.verbose, "More log output on stderr");
  app.add_flag("-q,--quiet", opts.quiet, "Errors only on stderr");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", opts.seed, "Root seed for every random choice")->capture_default_str();
    sub->add_flag("-v,--verbose", opts.verbose, "More log output on stderr");
    sub->add_flag("-q,--quiet", opts.quiet, "Errors only on stderr");
  };

  // build-ratings
  auto* br = app.add_subcommand("build-ratings", "Turn a play-event TSV (user_id, unix seconds, song_id) into ratings");
  std::string br_events, br_catalog, br_out;
  bool br_strict = false;
  int br_window = 24;
  std::optional<std::int64_t> br_from, br_to;
  br->add_option("--events", br_events, "Play events, tab separated; '#' lines ignored")
      ->required()
      ->check(CLI::ExistingFile);
  br->add_option("--catalog", br_catalog, "Song attribute CSV, used to report songs lacking attributes")
      ->check(CLI::ExistingFile);
  br->add_option("--out", br_out, "Matrix file to write (binary)")->required();
  br->add_flag("--strict", br_strict, "Fail on the first malformed line instead of skipping it");
  br->add_option("--window", br_window, "Recency window in months")->capture_default_str()->check(CLI::PositiveNumber);
  br->add_option("--from", br_from, "Ignore events before this unix time");
  br->add_option("--to", br_to, "Ignore events at or after this unix time");
  add_common(br);

  // train
  auto* tr = app.add_subcommand("train", "Build a model snapshot from a rating matrix");
  std::string tr_matrix, tr_catalog, tr_p22, tr_pat, tr_out;
  bool tr_no_mf = false, tr_no_index = false, tr_strict = false;
  double tr_ridge = 1e-3;
  std::optional<std::int64_t> tr_built_at;
  CfFlags tr_cf;
  MfFlags tr_mf;
  tr->add_option("--matrix", tr_matrix, "Matrix from build-ratings")->required()->check(CLI::ExistingFile);
  tr->add_option("--catalog", tr_catalog, "Song attribute CSV")->check(CLI::ExistingFile);
  tr->add_option("--playlist-2022", tr_p22, "Curated best-of-2022 playlist CSV")->check(CLI::ExistingFile);
  tr->add_option("--playlist-all-time", tr_pat, "Curated best-of-all-time playlist CSV")->check(CLI::ExistingFile);
  tr->add_option("--out", tr_out, "Snapshot file to write")->required();
  tr->add_flag("--no-mf", tr_no_mf, "Skip matrix factorization (no FEATURE explanations)");
  tr->add_flag("--no-neighbor-index", tr_no_index, "Compute neighbours per request instead of up front");
  tr->add_flag("--strict", tr_strict, "Fail on malformed catalog rows");
  tr->add_option("--ridge", tr_ridge, "Ridge penalty for the attribute mappers")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  tr->add_option("--built-at", tr_built_at, "Build time recorded in the snapshot (default SOURCE_DATE_EPOCH or now)");
  tr_cf.add(tr);
  tr_mf.add(tr);
  add_common(tr);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Hold out ratings and report RMSE, MAP@k and NDCG@k");
  std::string ev_matrix, ev_model = "cf", ev_split = "stratified", ev_norm = "rk", ev_format = "json", ev_out;
  double ev_fraction = 0.8, ev_threshold = 3.5;
  int ev_k = 3;
  CfFlags ev_cf;
  MfFlags ev_mf;
  ev->add_option("--matrix", ev_matrix, "Matrix from build-ratings")->required()->check(CLI::ExistingFile);
  ev->add_option("--model", ev_model, "cf, mf, oracle or random")
      ->capture_default_str()
      ->check(CLI::IsMember({"cf", "mf", "oracle", "random"}));
  ev->add_option("--split", ev_split, "stratified (per user) or global")
      ->capture_default_str()
      ->check(CLI::IsMember({"stratified", "global"}));
  ev->add_option("--train-fraction", ev_fraction, "Share of ratings kept for training")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  ev->add_option("--k", ev_k, "Cut-off for MAP and NDCG")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--threshold", ev_threshold, "Test rating that counts as relevant")->capture_default_str();
  ev->add_option("--ap-normalizer", ev_norm, "rk: relevant in top k; min: min(relevant, k)")
      ->capture_default_str()
      ->check(CLI::IsMember({"rk", "min"}));
  ev->add_option("--format", ev_format, "json or table")->capture_default_str()->check(CLI::IsMember({"json", "table"}));
  ev->add_option("--out", ev_out, "Write the report here instead of stdout");
  ev_cf.add(ev);
  ev_mf.add(ev);
  add_common(ev);

  // recommend
  auto* rc = app.add_subcommand("recommend", "Print a user's playlist as JSON");
  std::string rc_snapshot, rc_user, rc_source = "nostalgic", rc_algo = "cf", rc_out;
  int rc_k = 10;
  FilterFlags rc_filter;
  rc->add_option("--snapshot", rc_snapshot, "Snapshot from train")->required()->check(CLI::ExistingFile);
  rc->add_option("--user", rc_user, "User id")->required();
  rc->add_option("--k", rc_k, "Playlist length")->capture_default_str()->check(CLI::Range(1, 1000));
  rc->add_option("--source", rc_source, "nostalgic, best_of_2022 or best_of_all_time")
      ->capture_default_str()
      ->check(CLI::IsMember({"nostalgic", "best_of_2022", "best_of_all_time"}));
  rc->add_option("--algo", rc_algo, "cf or mf")->capture_default_str()->check(CLI::IsMember({"cf", "mf"}));
  rc->add_option("--out", rc_out, "Write the playlist here instead of stdout");
  rc_filter.add(rc);
  add_common(rc);

  // explain
  auto* ex = app.add_subcommand("explain", "Explain why a song was recommended to a user");
  std::string ex_snapshot, ex_user, ex_song, ex_algo = "cf", ex_out;
  ex->add_option("--snapshot", ex_snapshot, "Snapshot from train")->required()->check(CLI::ExistingFile);
  ex->add_option("--user", ex_user, "User id")->required();
  ex->add_option("--song", ex_song, "Song id")->required();
  ex->add_option("--algo", ex_algo, "cf (neighbour graph) or mf (attributes)")
      ->capture_default_str()
      ->check(CLI::IsMember({"cf", "mf"}));
  ex->add_option("--out", ex_out, "Write the explanation here instead of stdout");
  add_common(ex);

  // coldstart
  auto* cs = app.add_subcommand("coldstart", "Onboard a new user from a seed-song CSV");
  std::string cs_snapshot, cs_seeds, cs_user, cs_source = "nostalgic", cs_algo = "cf", cs_out, cs_snapshot_out;
  int cs_k = 10;
  cs->add_option("--snapshot", cs_snapshot, "Snapshot from train")->required()->check(CLI::ExistingFile);
  cs->add_option("--seeds", cs_seeds,
                 "Catalog-format CSV with an optional in_corpus_song_id column")
      ->required()
      ->check(CLI::ExistingFile);
  cs->add_option("--user-id", cs_user, "Id for the new user (default derived from the seed file)");
  cs->add_option("--k", cs_k, "Playlist length")->capture_default_str()->check(CLI::Range(1, 1000));
  cs->add_option("--source", cs_source, "nostalgic, best_of_2022 or best_of_all_time")
      ->capture_default_str()
      ->check(CLI::IsMember({"nostalgic", "best_of_2022", "best_of_all_time"}));
  cs->add_option("--algo", cs_algo, "cf or mf")->capture_default_str()->check(CLI::IsMember({"cf", "mf"}));
  cs->add_option("--out", cs_out, "Write the response here instead of stdout");
  cs->add_option("--snapshot-out", cs_snapshot_out, "Save the snapshot with the new user here");
  add_common(cs);

  // serve
  auto* sv = app.add_subcommand("serve", "Serve the HTTP API until SIGINT or SIGTERM");
  std::string sv_config, sv_snapshot, sv_host, sv_catalog, sv_p22, sv_pat, sv_hash;
  std::optional<int> sv_port;
  bool sv_strict = false;
  sv->add_option("--config", sv_config,
                 "JSON file: snapshot, host, port, catalog, playlists.{best_of_2022,best_of_all_time}, strict, "
                 "config_hash. Overrides EXPLORE_* variables; flags override both")
      ->check(CLI::ExistingFile);
  sv->add_option("--snapshot", sv_snapshot, "Snapshot from train");
  sv->add_option("--host", sv_host, "Bind address (default 127.0.0.1)");
  sv->add_option("--port", sv_port, "Port (default 8080, 0 picks one)")->check(CLI::Range(0, 65535));
  sv->add_option("--catalog", sv_catalog, "Replace the snapshot's catalog");
  sv->add_option("--playlist-2022", sv_p22, "Replace the best-of-2022 playlist");
  sv->add_option("--playlist-all-time", sv_pat, "Replace the best-of-all-time playlist");
  sv->add_flag("--strict", sv_strict, "Refuse a snapshot whose config hash differs from --config-hash");
  sv->add_option("--config-hash", sv_hash, "Expected config hash, 16 hex digits");
  add_common(sv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  g_verbosity = opts.quiet ? 0 : 1 + opts.verbose;
  auto* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  if (g_verbosity > 0) std::cerr << "level=info cmd=" << cmd << " seed=" << opts.seed << "\n";

  try {
    if (sub == br) return run_build_ratings(br_events, br_catalog, br_out, br_strict, br_window, br_from, br_to);

    if (sub == tr) {
      Matrix m;
      check(explore_matrix_load(tr_matrix.c_str(), m.out()), "read matrix");
      Catalog c;
      if (!tr_catalog.empty()) {
        Text warnings;
        check(explore_catalog_load(tr_catalog.c_str(), tr_strict, c.out(), warnings.out()), "read catalog");
        for (const auto& w : Json::parse(warnings.str())) log(1, cmd, "catalog: skipped " + w.get<std::string>());
      }
      Json o = {{"cf", tr_cf.json()},
                {"mf", tr_mf.json(opts.seed)},
                {"train_mf", !tr_no_mf},
                {"precompute_neighbors", !tr_no_index},
                {"ridge_penalty", tr_ridge},
                {"built_at", tr_built_at.value_or(default_built_at())}};
      if (!tr_p22.empty()) o["playlists"]["best_of_2022"] = tr_p22;
      if (!tr_pat.empty()) o["playlists"]["best_of_all_time"] = tr_pat;
      log(2, cmd, "options " + o.dump());
      Snapshot s;
      check(explore_snapshot_build(m.get(), c.get(), o.dump().c_str(), s.out()), "train");
      check(explore_snapshot_save(s.get(), tr_out.c_str()), "write snapshot");
      Text info;
      check(explore_snapshot_info(s.get(), info.out()), "train");
      const auto j = Json::parse(info.str());
      for (const auto& w : j.at("warnings")) log(1, cmd, w.get<std::string>());
      log(1, cmd, "wrote " + tr_out);
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (sub == ev) {
      Matrix m;
      check(explore_matrix_load(ev_matrix.c_str(), m.out()), "read matrix");
      const Json o = {{"model", ev_model},
                      {"split", ev_split},
                      {"train_fraction", ev_fraction},
                      {"seed", opts.seed},
                      {"k", ev_k},
                      {"relevance_threshold", ev_threshold},
                      {"ap_normalizer", ev_norm == "min" ? "min_r_k" : "relevant_in_top_k"},
                      {"cf", ev_cf.json()},
                      {"mf", ev_mf.json(opts.seed)}};
      Text report_json, report_text;
      check(explore_evaluate(m.get(), o.dump().c_str(), report_json.out(), report_text.out()), "evaluate");
      write_result(ev_format == "json" ? report_json.str() : report_text.str(), ev_out);
      return 0;
    }

    if (sub == rc) {
      Snapshot s;
      check(explore_snapshot_load(rc_snapshot.c_str(), nullptr, s.out()), "read snapshot");
      Json q = {{"k", std::to_string(rc_k)}, {"source", rc_source}, {"algo", rc_algo}};
      rc_filter.into(q);
      Text body;
      check(explore_recommend(s.get(), rc_user.c_str(), q.dump().c_str(), body.out()), "recommend");
      write_result(Json::parse(body.str()).dump(2), rc_out);
      return 0;
    }

    if (sub == ex) {
      Snapshot s;
      check(explore_snapshot_load(ex_snapshot.c_str(), nullptr, s.out()), "read snapshot");
      Text body;
      check(explore_explain(s.get(), ex_user.c_str(), ex_song.c_str(), ex_algo.c_str(), body.out()), "explain");
      write_result(Json::parse(body.str()).dump(2), ex_out);
      return 0;
    }

    if (sub == cs) {
      Snapshot s;
      check(explore_snapshot_load(cs_snapshot.c_str(), nullptr, s.out()), "read snapshot");
      const auto seeds = read_file(cs_seeds);
      const Json q = {{"k", std::to_string(cs_k)}, {"source", cs_source}, {"algo", cs_algo}};
      Snapshot next;
      Text body;
      check(explore_coldstart(s.get(), seeds.c_str(), cs_user.empty() ? nullptr : cs_user.c_str(),
                              q.dump().c_str(), next.out(), body.out()),
            "coldstart");
      if (!cs_snapshot_out.empty()) {
        check(explore_snapshot_save(next.get(), cs_snapshot_out.c_str()), "write snapshot");
        log(1, cmd, "wrote " + cs_snapshot_out);
      }
      write_result(Json::parse(body.str()).dump(2), cs_out);
      return 0;
    }

    if (sub == sv) {
      Json o = Json::object();
      if (!sv_snapshot.empty()) o["snapshot"] = sv_snapshot;
      if (!sv_host.empty()) o["host"] = sv_host;
      if (sv_port) o["port"] = *sv_port;
      if (!sv_catalog.empty()) o["catalog"] = sv_catalog;
      if (!sv_p22.empty()) o["playlists"]["best_of_2022"] = sv_p22;
      if (!sv_pat.empty()) o["playlists"]["best_of_all_time"] = sv_pat;
      if (sv_strict) o["strict"] = true;
      if (!sv_hash.empty()) o["config_hash"] = sv_hash;
      return run_serve(sv_config, o);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << explore_status_name(f.status) << ": " << f.what << "\n";
    return f.status == EXPLORE_INVALID_ARGUMENT ? kExitUsage : kExitData;
  }
  return kExitUsage;
}
