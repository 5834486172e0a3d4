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

// Seeded random rating matrices for property and oracle tests.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "explore/rating_matrix.hpp"

namespace explore::oracle {

// Ratings are drawn from {1, 1.5, ..., 5} so ties and zero-variance rows
// show up regularly.
inline RatingMatrix random_matrix(std::mt19937_64& rng, int min_users, int max_users, int min_songs, int max_songs,
                                  double density) {
  std::uniform_int_distribution<int> nu(min_users, max_users), ns(min_songs, max_songs), half(2, 10);
  std::bernoulli_distribution keep(density);
  const int users = nu(rng), songs = ns(rng);
  std::vector<std::string> uid, sid;
  for (int i = 0; i < users; ++i) uid.push_back("u" + std::to_string(i));
  for (int i = 0; i < songs; ++i) sid.push_back("s" + std::to_string(i));
  std::vector<RatingRow> rows(static_cast<std::size_t>(users));
  for (auto& row : rows) {
    for (int s = 0; s < songs; ++s) {
      if (keep(rng)) row.push_back({static_cast<std::uint32_t>(s), static_cast<float>(half(rng)) / 2.0F});
    }
  }
  return RatingMatrix(uid, sid, rows);
}

}  // namespace explore::oracle
