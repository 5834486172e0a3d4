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

#include <cmath>
#include <cstdint>

namespace explore {

// Scores that agree to 12 decimal places rank as ties, so ordering does not
// depend on last-bit rounding differences between equivalent computations.
// Callers break ties by ascending index.
inline std::int64_t ranking_key(double score) { return std::llround(score * 1e12); }

struct ScoredSong {
  std::uint32_t song = 0;
  double score = 0.0;

  bool operator==(const ScoredSong&) const = default;
};

// Descending score, ties by ascending song index.
inline bool score_order(const ScoredSong& a, const ScoredSong& b) {
  const auto ka = ranking_key(a.score);
  const auto kb = ranking_key(b.score);
  if (ka != kb) return ka > kb;
  return a.song < b.song;
}

}  // namespace explore
