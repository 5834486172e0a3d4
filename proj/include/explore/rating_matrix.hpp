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

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace explore {

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 5.0;

struct RatingEntry {
  std::uint32_t song = 0;
  float rating = 0.0F;

  bool operator==(const RatingEntry&) const = default;
};

using RatingRow = std::vector<RatingEntry>;

// Sparse user x song matrix of implicit ratings in [1,5].
//
// Ratings are stored as float because that is the on-disk precision; every
// computation widens them to double. Rows are sorted by song index with no
// duplicates. A user with no stored ratings has mean 0.
class RatingMatrix {
 public:
  RatingMatrix() = default;

  // Validates every invariant and throws InvalidArgument on violation.
  RatingMatrix(std::vector<std::string> users, std::vector<std::string> songs,
               std::vector<RatingRow> rows, std::vector<bool> synthetic = {});

  std::size_t user_count() const { return users_.size(); }
  std::size_t song_count() const { return songs_.size(); }
  std::size_t nnz() const { return nnz_; }
  bool empty() const { return nnz_ == 0; }

  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& songs() const { return songs_; }
  const std::string& user_id(std::size_t u) const { return users_.at(u); }
  const std::string& song_id(std::size_t s) const { return songs_.at(s); }

  std::optional<std::size_t> find_user(std::string_view id) const;
  std::optional<std::size_t> find_song(std::string_view id) const;

  std::span<const RatingEntry> row(std::size_t u) const { return rows_.at(u); }
  const std::vector<RatingRow>& rows() const { return rows_; }
  double user_mean(std::size_t u) const { return means_.at(u); }
  bool is_synthetic(std::size_t u) const { return synthetic_.at(u); }
  const std::vector<bool>& synthetic_flags() const { return synthetic_; }

  std::optional<double> rating(std::size_t u, std::size_t song) const;

  // Returns a copy with `row` set for `user_id`; an existing user's row is
  // replaced, otherwise the user is appended.
  RatingMatrix with_user(const std::string& user_id, RatingRow row, bool synthetic) const;

  // Same user/song tables, different entries. Used by train/test splits.
  RatingMatrix with_rows(std::vector<RatingRow> rows) const;

  bool operator==(const RatingMatrix& other) const {
    return users_ == other.users_ && songs_ == other.songs_ && rows_ == other.rows_ &&
           synthetic_ == other.synthetic_;
  }

 private:
  std::vector<std::string> users_;
  std::vector<std::string> songs_;
  std::vector<RatingRow> rows_;
  std::vector<bool> synthetic_;
  std::vector<double> means_;
  std::size_t nnz_ = 0;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::unordered_map<std::string, std::size_t> song_index_;
};

// Binary matrix file: magic "XPLM", u16 version, little-endian payload.
inline constexpr std::uint16_t kMatrixFormatVersion = 1;

void write_matrix(const RatingMatrix& matrix, std::ostream& out);
RatingMatrix read_matrix(std::istream& in);
void write_matrix(const RatingMatrix& matrix, const std::string& path);
RatingMatrix read_matrix(const std::string& path);

}  // namespace explore
