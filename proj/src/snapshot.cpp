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

#include "explore/snapshot.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "explore/error.hpp"

namespace explore::snapshot {
namespace {

constexpr std::string_view kMagic = "XPLS";
constexpr std::uint64_t kLimit = 1U << 28;

void fnv(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
}

std::string hex_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

void write_song(io::BinaryWriter& w, const SongAttributes& s) {
  w.str(s.song_id);
  w.str(s.title);
  w.str(s.artist);
  w.str(s.genre);
  for (double f : s.features()) w.f64(f);
}

SongAttributes read_song(io::BinaryReader& r) {
  SongAttributes s;
  s.song_id = r.str();
  s.title = r.str();
  s.artist = r.str();
  s.genre = r.str();
  s.danceability = r.f64();
  s.energy = r.f64();
  s.instrumentalness = r.f64();
  s.liveness = r.f64();
  s.duration_minutes = r.f64();
  return s;
}

void write_doubles(io::BinaryWriter& w, const std::vector<double>& v) {
  w.u64(v.size());
  for (double x : v) w.f64(x);
}

std::vector<double> read_doubles(io::BinaryReader& r) {
  const auto n = r.u64();
  if (n > kLimit) throw Error(ErrorCode::kCorruptFile, "implausible vector length");
  std::vector<double> v(n);
  for (auto& x : v) x = r.f64();
  return v;
}

void write_strings(io::BinaryWriter& w, const std::vector<std::string>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v) w.str(s);
}

std::vector<std::string> read_strings(io::BinaryReader& r) {
  std::vector<std::string> v(r.count(kLimit, "string"));
  for (auto& s : v) s = r.str();
  return v;
}

void write_config(io::BinaryWriter& w, const BuildConfig& c) {
  w.u64(c.cf.min_overlap);
  w.u64(c.cf.k);
  w.boolean(c.cf.keep_negative);
  w.u64(c.cf.significance_cap);
  w.boolean(c.precompute_neighbors);
  w.boolean(c.train_mf);
  w.u64(c.mf.factors);
  w.u64(c.mf.epochs);
  w.f64(c.mf.learning_rate);
  w.f64(c.mf.regularization);
  w.f64(c.mf.init_scale);
  w.u64(c.mf.seed);
  w.f64(c.ridge_penalty);
}

BuildConfig read_config(io::BinaryReader& r) {
  BuildConfig c;
  c.cf.min_overlap = r.u64();
  c.cf.k = r.u64();
  c.cf.keep_negative = r.boolean();
  c.cf.significance_cap = r.u64();
  c.precompute_neighbors = r.boolean();
  c.train_mf = r.boolean();
  c.mf.factors = r.u64();
  c.mf.epochs = r.u64();
  c.mf.learning_rate = r.f64();
  c.mf.regularization = r.f64();
  c.mf.init_scale = r.f64();
  c.mf.seed = r.u64();
  c.ridge_penalty = r.f64();
  return c;
}

void write_payload(io::BinaryWriter& w, const ModelSnapshot& s) {
  std::ostringstream matrix_bytes(std::ios::binary);
  write_matrix(s.matrix, matrix_bytes);
  const auto blob = matrix_bytes.str();
  w.u64(blob.size());
  w.bytes(blob);

  write_config(w, s.config);

  w.u32(static_cast<std::uint32_t>(s.neighbor_index.size()));
  for (const auto& set : s.neighbor_index) {
    w.u32(set.target);
    w.u32(static_cast<std::uint32_t>(set.neighbors.size()));
    for (const auto& n : set.neighbors) {
      w.u32(n.user);
      w.f64(n.similarity);
      w.f64(n.weight);
      w.u32(n.co_rated);
    }
  }

  w.boolean(s.model.has_value());
  if (s.model) {
    w.u64(s.model->user_count);
    w.u64(s.model->song_count);
    w.u64(s.model->dim);
    w.f64(s.model->global_mean);
    write_doubles(w, s.model->user_factors);
    write_doubles(w, s.model->item_factors);
    write_doubles(w, s.model->training_log);
  }

  w.boolean(s.mapper.has_value());
  if (s.mapper) {
    const auto& m = *s.mapper;
    write_strings(w, m.attribute_names);
    write_doubles(w, m.means);
    write_doubles(w, m.stddevs);
    w.u32(static_cast<std::uint32_t>(m.kept.size()));
    for (bool k : m.kept) w.boolean(k);
    w.u32(static_cast<std::uint32_t>(m.dimensions.size()));
    for (const auto& d : m.dimensions) {
      write_doubles(w, d.coefficients);
      w.f64(d.intercept);
      w.f64(d.fit_r2);
    }
    w.f64(m.penalty);
    write_strings(w, m.warnings);
  }

  w.u32(static_cast<std::uint32_t>(s.catalog.size()));
  for (const auto& song : s.catalog.songs()) write_song(w, song);

  w.u32(static_cast<std::uint32_t>(s.playlists.size()));
  for (const auto& [source, p] : s.playlists) {
    w.u8(static_cast<std::uint8_t>(source));
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.songs.size()));
    for (const auto& song : p.songs) write_song(w, song);
  }

  write_strings(w, s.warnings);
}

ModelSnapshot read_payload(io::BinaryReader& r) {
  ModelSnapshot s;
  const auto blob_size = r.u64();
  if (blob_size > (1ULL << 36)) throw Error(ErrorCode::kCorruptFile, "implausible matrix size");
  std::istringstream matrix_bytes(r.bytes(blob_size), std::ios::binary);
  try {
    s.matrix = read_matrix(matrix_bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("embedded matrix: ") + e.what());
  }

  s.config = read_config(r);

  const auto n_sets = r.count(s.matrix.user_count(), "neighbour set");
  s.neighbor_index.resize(n_sets);
  for (auto& set : s.neighbor_index) {
    set.target = r.u32();
    set.neighbors.resize(r.count(s.matrix.user_count(), "neighbour"));
    for (auto& n : set.neighbors) {
      n.user = r.u32();
      n.similarity = r.f64();
      n.weight = r.f64();
      n.co_rated = r.u32();
      if (n.user >= s.matrix.user_count()) throw Error(ErrorCode::kCorruptFile, "neighbour index out of range");
    }
  }

  if (r.boolean()) {
    mf::FactorModel m;
    m.user_count = r.u64();
    m.song_count = r.u64();
    m.dim = r.u64();
    m.global_mean = r.f64();
    m.user_factors = read_doubles(r);
    m.item_factors = read_doubles(r);
    m.training_log = read_doubles(r);
    if (m.user_count != s.matrix.user_count() || m.song_count != s.matrix.song_count() ||
        m.user_factors.size() != m.user_count * m.dim || m.item_factors.size() != m.song_count * m.dim) {
      throw Error(ErrorCode::kCorruptFile, "factor model does not match the matrix");
    }
    s.model = std::move(m);
  }

  if (r.boolean()) {
    explain::LatentMapper m;
    m.attribute_names = read_strings(r);
    m.means = read_doubles(r);
    m.stddevs = read_doubles(r);
    m.kept.resize(r.count(kLimit, "column"));
    for (std::size_t i = 0; i < m.kept.size(); ++i) m.kept[i] = r.boolean();
    m.dimensions.resize(r.count(kLimit, "dimension"));
    for (auto& d : m.dimensions) {
      d.coefficients = read_doubles(r);
      d.intercept = r.f64();
      d.fit_r2 = r.f64();
    }
    m.penalty = r.f64();
    m.warnings = read_strings(r);
    s.mapper = std::move(m);
  }

  std::vector<SongAttributes> songs(r.count(kLimit, "catalog song"));
  for (auto& song : songs) song = read_song(r);
  s.catalog = Catalog(std::move(songs));

  const auto n_playlists = r.count(3, "playlist");
  for (std::uint32_t i = 0; i < n_playlists; ++i) {
    const auto source = r.u8();
    if (source > static_cast<std::uint8_t>(selector::Source::kBestOfAllTime)) {
      throw Error(ErrorCode::kCorruptFile, "unknown playlist source");
    }
    selector::CuratedPlaylist p;
    p.name = r.str();
    p.songs.resize(r.count(kLimit, "playlist song"));
    for (auto& song : p.songs) song = read_song(r);
    s.playlists[static_cast<selector::Source>(source)] = std::move(p);
  }

  s.warnings = read_strings(r);
  return s;
}

}  // namespace

std::uint64_t config_hash(const BuildConfig& c) {
  std::ostringstream text;
  text << "cf.min_overlap=" << c.cf.min_overlap << ";cf.k=" << c.cf.k << ";cf.keep_negative=" << c.cf.keep_negative
       << ";cf.significance_cap=" << c.cf.significance_cap << ";precompute_neighbors=" << c.precompute_neighbors
       << ";train_mf=" << c.train_mf << ";mf.factors=" << c.mf.factors << ";mf.epochs=" << c.mf.epochs
       << ";mf.learning_rate=" << hex_double(c.mf.learning_rate)
       << ";mf.regularization=" << hex_double(c.mf.regularization)
       << ";mf.init_scale=" << hex_double(c.mf.init_scale) << ";mf.seed=" << c.mf.seed
       << ";ridge_penalty=" << hex_double(c.ridge_penalty);
  std::uint64_t h = 1469598103934665603ULL;
  fnv(h, text.str());
  return h;
}

selector::SongSources ModelSnapshot::sources() const {
  selector::SongSources out{&catalog, {}};
  for (const auto& [source, p] : playlists) out.playlists[source] = &p;
  return out;
}

cf::NeighborSet ModelSnapshot::neighbor_set(std::size_t user) const {
  if (user >= matrix.user_count()) throw Error(ErrorCode::kUnknownUser, "user index out of range");
  if (neighbor_index.empty()) return cf::neighbors(matrix, user, config.cf.k, config.cf);
  const auto& set = neighbor_index[user];
  if (set.neighbors.empty()) {
    throw Error(ErrorCode::kEmptyNeighborhood, "user '" + matrix.user_id(user) + "' has no neighbours");
  }
  return set;
}

ModelSnapshot build_snapshot(RatingMatrix matrix, Catalog catalog,
                             std::map<selector::Source, selector::CuratedPlaylist> playlists,
                             const BuildConfig& config, std::int64_t built_at) {
  if (matrix.empty()) throw Error(ErrorCode::kEmptyInput, "cannot build a snapshot from an empty matrix");
  for (const auto& [source, p] : playlists) selector::validate_playlist(p);

  ModelSnapshot s;
  s.config = config;
  s.metadata = {kSnapshotFormatVersion, built_at, config_hash(config)};
  if (config.precompute_neighbors) s.neighbor_index = cf::build_neighbor_index(matrix, config.cf);
  if (config.train_mf) {
    s.model = mf::train_mf(matrix, config.mf);
    if (catalog.empty()) {
      s.warnings.push_back("NoCatalog: feature explanations disabled");
    } else {
      try {
        s.mapper = explain::fit_latent_mappers(*s.model, matrix, catalog, config.ridge_penalty);
      } catch (const Error& e) {
        s.warnings.push_back(std::string(ErrorCodeName(e.code())) + ": feature explanations disabled: " + e.what());
      }
    }
  }
  s.matrix = std::move(matrix);
  s.catalog = std::move(catalog);
  s.playlists = std::move(playlists);
  return s;
}

ColdStartSnapshot with_cold_start_user(const ModelSnapshot& base, const coldstart::SeedProfile& profile,
                                       std::size_t representatives) {
  auto result = coldstart::cold_start(base.matrix, base.catalog, profile, representatives);
  ModelSnapshot s = base;
  s.matrix = result.matrix;
  if (!s.neighbor_index.empty()) s.neighbor_index = cf::build_neighbor_index(s.matrix, s.config.cf);
  if (s.model) {
    const auto p = mf::fold_in_user(*s.model, result.row, s.config.mf.regularization);
    s.model = mf::with_user_factors(*s.model, result.user, p);
  }
  return {std::move(s), std::move(result)};
}

void save_snapshot(const ModelSnapshot& snapshot, std::ostream& out) {
  io::BinaryWriter w(out);
  w.bytes(kMagic);
  w.u16(kSnapshotFormatVersion);
  w.u64(snapshot.metadata.config_hash);
  w.i64(snapshot.metadata.built_at);
  write_payload(w, snapshot);
  if (!out) throw Error(ErrorCode::kIo, "failed writing snapshot");
}

void save_snapshot(const ModelSnapshot& snapshot, const std::string& path) {
  // Write beside the target and rename, so a reader never sees half a file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + tmp + "' for writing");
    save_snapshot(snapshot, out);
    out.close();
    if (!out) throw Error(ErrorCode::kIo, "failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::kIo, "cannot move snapshot into place at '" + path + "'");
  }
}

ModelSnapshot load_snapshot(std::istream& in, std::optional<std::uint64_t> expected_hash) {
  io::BinaryReader r(in);
  std::string magic;
  try {
    magic = r.bytes(kMagic.size());
  } catch (const Error&) {
    throw Error(ErrorCode::kVersionMismatch, "not a snapshot file: missing XPLS header");
  }
  if (magic != kMagic) throw Error(ErrorCode::kVersionMismatch, "not a snapshot file: bad magic bytes");
  const auto version = r.u16();
  if (version != kSnapshotFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "snapshot format version " + std::to_string(version) +
                                                 " is not supported (expected " +
                                                 std::to_string(kSnapshotFormatVersion) + ")");
  }
  Metadata meta;
  meta.format_version = version;
  meta.config_hash = r.u64();
  meta.built_at = r.i64();
  if (expected_hash && *expected_hash != meta.config_hash) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "snapshot config hash %016llx differs from expected %016llx",
                  static_cast<unsigned long long>(meta.config_hash),
                  static_cast<unsigned long long>(*expected_hash));
    throw Error(ErrorCode::kConfigMismatch, buf);
  }

  ModelSnapshot s;
  try {
    s = read_payload(r);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptFile) throw;
    throw Error(ErrorCode::kCorruptFile, std::string("snapshot payload invalid: ") + e.what());
  }
  r.expect_end();
  if (config_hash(s.config) != meta.config_hash) {
    throw Error(ErrorCode::kCorruptFile, "stored config does not match the header hash");
  }
  if (!s.neighbor_index.empty() && s.neighbor_index.size() != s.matrix.user_count()) {
    throw Error(ErrorCode::kCorruptFile, "neighbour index does not cover every user");
  }
  s.metadata = meta;
  return s;
}

ModelSnapshot load_snapshot(const std::string& path, std::optional<std::uint64_t> expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open snapshot '" + path + "'");
  return load_snapshot(in, expected_hash);
}

}  // namespace explore::snapshot
