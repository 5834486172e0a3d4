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

#include "explore/rating_matrix.hpp"

#include <algorithm>
#include <fstream>

#include "binary_io.hpp"
#include "explore/error.hpp"

namespace explore {
namespace {

constexpr std::string_view kMatrixMagic = "XPLM";

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); }

std::unordered_map<std::string, std::size_t> build_index(const std::vector<std::string>& ids,
                                                         const char* what) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty()) invalid(std::string("empty ") + what + " id");
    if (!index.emplace(ids[i], i).second) invalid(std::string("duplicate ") + what + " id '" + ids[i] + "'");
  }
  return index;
}

}  // namespace

RatingMatrix::RatingMatrix(std::vector<std::string> users, std::vector<std::string> songs,
                           std::vector<RatingRow> rows, std::vector<bool> synthetic)
    : users_(std::move(users)), songs_(std::move(songs)), rows_(std::move(rows)), synthetic_(std::move(synthetic)) {
  if (rows_.size() != users_.size()) invalid("row count does not match user count");
  if (synthetic_.empty()) synthetic_.assign(users_.size(), false);
  if (synthetic_.size() != users_.size()) invalid("synthetic flag count does not match user count");
  user_index_ = build_index(users_, "user");
  song_index_ = build_index(songs_, "song");

  means_.assign(users_.size(), 0.0);
  for (std::size_t u = 0; u < rows_.size(); ++u) {
    const auto& row = rows_[u];
    double sum = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      const auto& e = row[k];
      if (e.song >= songs_.size()) invalid("song index out of range in row of '" + users_[u] + "'");
      if (k > 0 && row[k - 1].song >= e.song) invalid("row of '" + users_[u] + "' is not strictly sorted");
      if (!(e.rating >= kMinRating && e.rating <= kMaxRating)) {
        invalid("rating outside [1,5] in row of '" + users_[u] + "'");
      }
      sum += static_cast<double>(e.rating);
    }
    means_[u] = row.empty() ? 0.0 : sum / static_cast<double>(row.size());
    nnz_ += row.size();
  }
}

std::optional<std::size_t> RatingMatrix::find_user(std::string_view id) const {
  auto it = user_index_.find(std::string(id));
  if (it == user_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> RatingMatrix::find_song(std::string_view id) const {
  auto it = song_index_.find(std::string(id));
  if (it == song_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> RatingMatrix::rating(std::size_t u, std::size_t song) const {
  const auto& r = rows_.at(u);
  auto it = std::lower_bound(r.begin(), r.end(), song,
                             [](const RatingEntry& e, std::size_t s) { return e.song < s; });
  if (it == r.end() || it->song != song) return std::nullopt;
  return static_cast<double>(it->rating);
}

RatingMatrix RatingMatrix::with_user(const std::string& user_id, RatingRow row, bool synthetic) const {
  auto users = users_;
  auto rows = rows_;
  auto flags = synthetic_;
  if (auto existing = find_user(user_id)) {
    rows[*existing] = std::move(row);
    flags[*existing] = synthetic;
  } else {
    users.push_back(user_id);
    rows.push_back(std::move(row));
    flags.push_back(synthetic);
  }
  return RatingMatrix(std::move(users), songs_, std::move(rows), std::move(flags));
}

RatingMatrix RatingMatrix::with_rows(std::vector<RatingRow> rows) const {
  return RatingMatrix(users_, songs_, std::move(rows), synthetic_);
}

void write_matrix(const RatingMatrix& matrix, std::ostream& out) {
  io::BinaryWriter w(out);
  w.bytes(kMatrixMagic);
  w.u16(kMatrixFormatVersion);
  w.u32(static_cast<std::uint32_t>(matrix.user_count()));
  w.u32(static_cast<std::uint32_t>(matrix.song_count()));
  w.u64(matrix.nnz());
  for (const auto& id : matrix.users()) w.str(id);
  for (const auto& id : matrix.songs()) w.str(id);
  for (std::size_t u = 0; u < matrix.user_count(); ++u) w.u8(matrix.is_synthetic(u) ? 1 : 0);
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    const auto row = matrix.row(u);
    w.u32(static_cast<std::uint32_t>(row.size()));
    for (const auto& e : row) {
      w.u32(e.song);
      w.f32(e.rating);
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing matrix");
}

RatingMatrix read_matrix(std::istream& in) {
  io::BinaryReader r(in);
  std::string magic;
  try {
    magic = r.bytes(kMatrixMagic.size());
  } catch (const Error&) {
    throw Error(ErrorCode::kVersionMismatch, "not a matrix file: missing XPLM header");
  }
  if (magic != kMatrixMagic) throw Error(ErrorCode::kVersionMismatch, "not a matrix file: bad magic bytes");
  const auto version = r.u16();
  if (version != kMatrixFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "matrix format version " + std::to_string(version) +
                                                 " is not supported (expected " +
                                                 std::to_string(kMatrixFormatVersion) + ")");
  }
  constexpr std::uint64_t kLimit = 1U << 28;
  const auto n_users = r.count(kLimit, "user");
  const auto n_songs = r.count(kLimit, "song");
  const auto nnz = r.u64();

  std::vector<std::string> users(n_users);
  std::vector<std::string> songs(n_songs);
  for (auto& id : users) id = r.str();
  for (auto& id : songs) id = r.str();
  std::vector<bool> flags(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    const auto f = r.u8();
    if (f > 1) throw Error(ErrorCode::kCorruptFile, "invalid user flags");
    flags[u] = f == 1;
  }
  std::vector<RatingRow> rows(n_users);
  std::uint64_t seen = 0;
  for (auto& row : rows) {
    const auto n = r.count(n_songs, "row entry");
    row.resize(n);
    for (auto& e : row) {
      e.song = r.u32();
      e.rating = r.f32();
    }
    seen += n;
  }
  r.expect_end();
  if (seen != nnz) throw Error(ErrorCode::kCorruptFile, "entry count does not match header");
  try {
    return RatingMatrix(std::move(users), std::move(songs), std::move(rows), std::move(flags));
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("matrix payload invalid: ") + e.what());
  }
}

void write_matrix(const RatingMatrix& matrix, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_matrix(matrix, out);
}

RatingMatrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return read_matrix(in);
}

}  // namespace explore
