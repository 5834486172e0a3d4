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

// Synthetic low-rank rating matrices for factorisation recovery tests.

#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "explore/rating_matrix.hpp"

namespace explore::oracle {

// r_ui = a_u . b_i with a, b ~ Uniform(0, 1)^rank, min-max scaled into
// [1, 5] over the whole matrix. Each cell is kept with probability `density`.
inline RatingMatrix low_rank_matrix(std::uint64_t seed, int users, int songs, int rank, double density = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<double> a(static_cast<std::size_t>(users * rank)), b(static_cast<std::size_t>(songs * rank));
  for (auto& x : a) x = unit(rng);
  for (auto& x : b) x = unit(rng);
  std::vector<double> raw(static_cast<std::size_t>(users * songs));
  for (int u = 0; u < users; ++u) {
    for (int s = 0; s < songs; ++s) {
      double v = 0.0;
      for (int k = 0; k < rank; ++k) v += a[static_cast<std::size_t>(u * rank + k)] * b[static_cast<std::size_t>(s * rank + k)];
      raw[static_cast<std::size_t>(u * songs + s)] = v;
    }
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double lo_v = *lo, span = *hi - *lo;
  std::vector<std::string> uid, sid;
  for (int i = 0; i < users; ++i) uid.push_back("u" + std::to_string(i));
  for (int i = 0; i < songs; ++i) sid.push_back("s" + std::to_string(i));
  std::vector<RatingRow> rows(static_cast<std::size_t>(users));
  for (int u = 0; u < users; ++u) {
    for (int s = 0; s < songs; ++s) {
      if (!keep(rng)) continue;
      const double r = 1.0 + 4.0 * (raw[static_cast<std::size_t>(u * songs + s)] - lo_v) / span;
      rows[static_cast<std::size_t>(u)].push_back({static_cast<std::uint32_t>(s), static_cast<float>(r)});
    }
  }
  return RatingMatrix(uid, sid, rows);
}

}  // namespace explore::oracle
