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

#include "explore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "explore/error.hpp"
#include "explore/ranking.hpp"

namespace explore::metrics {
namespace {

// ceil(f * n) without float noise pushing exact products up by one.
std::size_t train_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

struct Candidate {
  std::uint32_t song;
  double score;
  bool supported;
};

// Supported candidates by score (ranking_key) then index; unsupported after,
// by index.
std::vector<std::uint32_t> order_candidates(std::vector<Candidate> cands) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.supported != b.supported) return a.supported;
    if (a.supported) {
      const auto ka = ranking_key(a.score), kb = ranking_key(b.score);
      if (ka != kb) return ka > kb;
    }
    return a.song < b.song;
  });
  std::vector<std::uint32_t> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(c.song);
  return out;
}

}  // namespace

std::string_view strategy_name(SplitStrategy s) {
  return s == SplitStrategy::kStratifiedPerUser ? "stratified" : "global";
}

std::optional<SplitStrategy> parse_strategy(std::string_view s) {
  if (s == "stratified") return SplitStrategy::kStratifiedPerUser;
  if (s == "global") return SplitStrategy::kGlobalRandom;
  return std::nullopt;
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kCf:
      return "cf";
    case ModelKind::kMf:
      return "mf";
    case ModelKind::kOracle:
      return "oracle";
    case ModelKind::kRandom:
      return "random";
  }
  return "cf";
}

std::optional<ModelKind> parse_model(std::string_view s) {
  for (auto k : {ModelKind::kCf, ModelKind::kMf, ModelKind::kOracle, ModelKind::kRandom}) {
    if (model_name(k) == s) return k;
  }
  return std::nullopt;
}

Split split(const RatingMatrix& matrix, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must lie strictly between 0 and 1");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<RatingRow> train(matrix.user_count()), test(matrix.user_count());

  if (spec.strategy == SplitStrategy::kStratifiedPerUser) {
    for (std::size_t u = 0; u < matrix.user_count(); ++u) {
      if (matrix.is_synthetic(u)) continue;
      const auto row = matrix.row(u);
      if (row.size() < 2) {
        train[u].assign(row.begin(), row.end());
        continue;
      }
      std::vector<std::size_t> order(row.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      const std::size_t n_train = train_count(spec.train_fraction, row.size());
      for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? train[u] : test[u]).push_back(row[order[i]]);
    }
  } else {
    std::vector<std::pair<std::size_t, RatingEntry>> all;
    for (std::size_t u = 0; u < matrix.user_count(); ++u) {
      if (matrix.is_synthetic(u)) continue;
      for (const auto& e : matrix.row(u)) all.emplace_back(u, e);
    }
    std::shuffle(all.begin(), all.end(), rng);
    const std::size_t n_train = train_count(spec.train_fraction, all.size());
    for (std::size_t i = 0; i < all.size(); ++i) (i < n_train ? train : test)[all[i].first].push_back(all[i].second);
  }

  std::size_t test_nnz = 0;
  for (auto* rows : {&train, &test}) {
    for (auto& r : *rows) std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.song < b.song; });
  }
  for (const auto& r : test) test_nnz += r.size();
  if (test_nnz == 0) {
    throw Error(ErrorCode::kEmptyTest, "split left no test entries (too few ratings per user for a " +
                                           std::string(strategy_name(spec.strategy)) + " split)");
  }
  return {matrix.with_rows(std::move(train)), matrix.with_rows(std::move(test))};
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw Error(ErrorCode::kLengthMismatch, "rmse: inputs differ in length");
  if (predicted.empty()) throw Error(ErrorCode::kEmptyInput, "rmse: no values");
  double sse = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) sse += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
  return std::sqrt(sse / static_cast<double>(predicted.size()));
}

double average_precision_at_k(std::span<const std::uint32_t> ranked, const std::set<std::uint32_t>& relevant,
                              std::size_t k, ApNormalizer normalizer) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < k && pos < ranked.size(); ++pos) {
    if (!relevant.contains(ranked[pos])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
  }
  const std::size_t norm = normalizer == ApNormalizer::kRelevantInTopK ? hits : std::min(relevant.size(), k);
  return norm == 0 ? 0.0 : sum / static_cast<double>(norm);
}

double map_at_k(const std::vector<std::vector<std::uint32_t>>& rankings,
                const std::vector<std::set<std::uint32_t>>& relevant, std::size_t k, ApNormalizer normalizer) {
  if (rankings.empty()) throw Error(ErrorCode::kNoUsers, "map@k needs at least one user");
  if (rankings.size() != relevant.size()) throw Error(ErrorCode::kLengthMismatch, "map@k: rankings vs judgments");
  double sum = 0.0;
  for (std::size_t u = 0; u < rankings.size(); ++u) sum += average_precision_at_k(rankings[u], relevant[u], k, normalizer);
  return sum / static_cast<double>(rankings.size());
}

double ndcg_at_k(std::span<const double> gains, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  for (double g : gains) {
    if (g < 0.0 || std::isnan(g)) throw Error(ErrorCode::kNegativeGain, "ndcg: gains must be non-negative");
  }
  auto dcg = [k](std::span<const double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i < k && i < g.size(); ++i) s += g[i] / std::log2(static_cast<double>(i) + 2.0);
    return s;
  };
  std::vector<double> ideal(gains.begin(), gains.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal);
  return idcg == 0.0 ? 0.0 : dcg(gains) / idcg;
}

EvaluationReport evaluate(ModelKind kind, const RatingMatrix& matrix, const SplitSpec& spec, std::size_t k,
                          double relevance_threshold, const EvalConfig& config) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  const auto [train, test] = split(matrix, spec);

  EvaluationReport report;
  report.model = kind;
  report.split = spec;
  report.k = k;
  report.relevance_threshold = relevance_threshold;
  report.ap_normalizer = config.ap_normalizer;
  report.train_entries = train.nnz();
  report.test_entries = test.nnz();

  double train_sum = 0.0;
  for (const auto& row : train.rows()) {
    for (const auto& e : row) train_sum += e.rating;
  }
  const double global_mean = train.nnz() ? train_sum / static_cast<double>(train.nnz()) : 3.0;

  std::optional<mf::FactorModel> factors;
  if (kind == ModelKind::kMf) factors = mf::train_mf(train, config.mf);
  // Independent stream for the random baseline so it never perturbs the split.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> random_rating(kMinRating, kMaxRating);

  std::vector<double> predicted, actual;
  std::vector<std::vector<std::uint32_t>> rankings;
  std::vector<std::set<std::uint32_t>> judgments;
  double ndcg_sum = 0.0;

  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    const auto test_row = test.row(u);
    if (test_row.empty()) continue;
    const double fallback = train.row(u).empty() ? global_mean : train.user_mean(u);

    std::optional<cf::NeighborSet> hood;
    if (kind == ModelKind::kCf) {
      try {
        hood = cf::neighbors(train, u, config.cf.k, config.cf);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyNeighborhood) throw;
      }
    }

    // Test-entry predictions.
    for (const auto& e : test_row) {
      double p = fallback;
      switch (kind) {
        case ModelKind::kCf:
          if (hood) {
            try {
              p = cf::predict_rating(train, u, e.song, *hood).value;
            } catch (const Error& err) {
              if (err.code() != ErrorCode::kNoRatingSupport) throw;
              ++report.rmse_fallbacks;
            }
          } else {
            ++report.rmse_fallbacks;
          }
          break;
        case ModelKind::kMf:
          p = mf::predict_mf(*factors, u, e.song);
          break;
        case ModelKind::kOracle:
          p = e.rating;
          break;
        case ModelKind::kRandom:
          p = random_rating(rng);
          break;
      }
      predicted.push_back(p);
      actual.push_back(e.rating);
    }

    // Candidate ranking over every song not rated in train.
    std::vector<bool> in_train(matrix.song_count(), false);
    for (const auto& e : train.row(u)) in_train[e.song] = true;
    std::vector<double> gain(matrix.song_count(), 0.0);
    std::set<std::uint32_t> relevant;
    for (const auto& e : test_row) {
      gain[e.song] = e.rating;
      if (e.rating >= relevance_threshold) relevant.insert(e.song);
    }

    std::vector<Candidate> cands;
    if (kind == ModelKind::kCf && hood) {
      std::vector<bool> scored(matrix.song_count(), false);
      for (const auto& r : cf::recommend_cf(train, *hood, matrix.song_count(), true)) {
        cands.push_back({r.song, r.score, true});
        scored[r.song] = true;
      }
      for (std::uint32_t s = 0; s < matrix.song_count(); ++s) {
        if (!in_train[s] && !scored[s]) cands.push_back({s, 0.0, false});
      }
    } else if (kind == ModelKind::kMf) {
      for (const auto& r : mf::recommend_mf(*factors, train, u, matrix.song_count(), true, config.mf_ranking)) {
        cands.push_back({r.song, r.score, true});
      }
    } else {
      for (std::uint32_t s = 0; s < matrix.song_count(); ++s) {
        if (in_train[s]) continue;
        double score = 0.0;
        if (kind == ModelKind::kOracle) score = gain[s];
        cands.push_back({s, score, kind != ModelKind::kCf});
      }
      if (kind == ModelKind::kRandom) {
        std::shuffle(cands.begin(), cands.end(), rng);
        for (std::size_t i = 0; i < cands.size(); ++i) cands[i].score = -static_cast<double>(i);
      }
    }
    auto ranked = order_candidates(std::move(cands));

    std::vector<double> ranked_gains;
    ranked_gains.reserve(ranked.size());
    for (auto s : ranked) ranked_gains.push_back(gain[s]);

    UserResult r;
    r.user_id = matrix.user_id(u);
    r.test_count = test_row.size();
    r.relevant_count = relevant.size();
    r.average_precision = average_precision_at_k(ranked, relevant, k, config.ap_normalizer);
    r.ndcg = ndcg_at_k(ranked_gains, k);
    ndcg_sum += r.ndcg;
    report.per_user.push_back(std::move(r));
    rankings.push_back(std::move(ranked));
    judgments.push_back(std::move(relevant));
  }

  report.rmse = rmse(predicted, actual);
  report.map_at_k = map_at_k(rankings, judgments, k, config.ap_normalizer);
  report.mean_ndcg = ndcg_sum / static_cast<double>(report.per_user.size());
  return report;
}

}  // namespace explore::metrics
