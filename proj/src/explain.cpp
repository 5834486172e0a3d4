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

#include "explore/explain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "explore/error.hpp"

namespace explore::explain {
namespace {

bool is_constant(double mean, double stddev) { return stddev <= 1e-12 * std::max(1.0, std::abs(mean)); }

}  // namespace

double LatentMapper::predict(std::size_t j, std::span<const double> attributes) const {
  const auto& fit = dimensions.at(j);
  double y = fit.intercept;
  for (std::size_t a = 0; a < attribute_names.size(); ++a) {
    if (kept[a]) y += fit.coefficients[a] * (attributes[a] - means[a]) / stddevs[a];
  }
  return y;
}

std::vector<double> LatentMapper::raw_coefficients(std::size_t j) const {
  const auto& fit = dimensions.at(j);
  std::vector<double> out(attribute_names.size(), 0.0);
  for (std::size_t a = 0; a < out.size(); ++a) {
    if (kept[a]) out[a] = fit.coefficients[a] / stddevs[a];
  }
  return out;
}

double LatentMapper::raw_intercept(std::size_t j) const {
  const auto& fit = dimensions.at(j);
  double c = fit.intercept;
  for (std::size_t a = 0; a < attribute_names.size(); ++a) {
    if (kept[a]) c -= fit.coefficients[a] * means[a] / stddevs[a];
  }
  return c;
}

LatentMapper fit_latent_mappers(const std::vector<AttributeVector>& attributes, std::span<const double> targets,
                                std::size_t dim, double penalty) {
  const std::size_t n = attributes.size();
  const std::size_t p = kAttributeCount;
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "latent dimension must be positive");
  if (targets.size() != n * dim) throw Error(ErrorCode::kLengthMismatch, "targets do not match attribute rows");
  if (n < p + 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least " + std::to_string(p + 1) + " songs to fit mappers, got " +
                                                 std::to_string(n));
  }
  if (!(penalty >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "ridge penalty must be non-negative");

  LatentMapper mapper;
  mapper.penalty = penalty;
  mapper.attribute_names.assign(kAttributeNames.begin(), kAttributeNames.end());
  mapper.means.assign(p, 0.0);
  mapper.stddevs.assign(p, 0.0);
  mapper.kept.assign(p, true);

  for (std::size_t a = 0; a < p; ++a) {
    double sum = 0.0;
    for (const auto& row : attributes) sum += row[a];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& row : attributes) ss += (row[a] - mean) * (row[a] - mean);
    mapper.means[a] = mean;
    mapper.stddevs[a] = std::sqrt(ss / static_cast<double>(n));
    if (is_constant(mean, mapper.stddevs[a])) {
      mapper.kept[a] = false;
      mapper.warnings.push_back("DegenerateDesign: attribute '" + mapper.attribute_names[a] +
                                "' is constant; column dropped");
    }
  }

  std::vector<std::size_t> cols;
  for (std::size_t a = 0; a < p; ++a) {
    if (mapper.kept[a]) cols.push_back(a);
  }
  const auto q = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), q);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < q; ++c) {
      const auto a = cols[static_cast<std::size_t>(c)];
      x(static_cast<Eigen::Index>(i), c) = (attributes[i][a] - mapper.means[a]) / mapper.stddevs[a];
    }
  }
  // Standardized columns have zero mean, so the intercept decouples and is
  // left unpenalized.
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += penalty;
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);

  for (std::size_t j = 0; j < dim; ++j) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = targets[i * dim + j];
    const double y_mean = y.mean();
    const Eigen::VectorXd yc = y.array() - y_mean;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
    if (q > 0) beta = solver.solve(x.transpose() * yc);

    DimensionFit fit;
    fit.intercept = y_mean;
    fit.coefficients.assign(p, 0.0);
    for (Eigen::Index c = 0; c < q; ++c) fit.coefficients[cols[static_cast<std::size_t>(c)]] = beta(c);
    const double ss_tot = yc.squaredNorm();
    const double ss_res = (yc - x * beta).squaredNorm();
    fit.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    mapper.dimensions.push_back(std::move(fit));
  }
  return mapper;
}

LatentMapper fit_latent_mappers(const mf::FactorModel& model, const RatingMatrix& matrix, const Catalog& catalog,
                                double penalty) {
  std::vector<AttributeVector> rows;
  std::vector<double> targets;
  std::size_t missing = 0;
  for (std::size_t s = 0; s < model.song_count && s < matrix.song_count(); ++s) {
    const auto* song = catalog.find(matrix.song_id(s));
    if (song == nullptr) {
      ++missing;
      continue;
    }
    rows.push_back(song->features());
    const auto q = model.item_vector(s);
    targets.insert(targets.end(), q.begin(), q.end());
  }
  auto mapper = fit_latent_mappers(rows, targets, model.dim, penalty);
  if (missing > 0) {
    mapper.warnings.push_back(std::to_string(missing) + " factored songs have no catalog attributes; skipped");
  }
  return mapper;
}

LatentContribution top_latent_dimension(const mf::FactorModel& model, std::size_t user, std::size_t song) {
  if (user >= model.user_count) throw Error(ErrorCode::kUnknownUser, "user index out of range for factor model");
  if (song >= model.song_count) throw Error(ErrorCode::kUnknownSong, "song index out of range for factor model");
  const auto p = model.user_vector(user);
  const auto q = model.item_vector(song);
  LatentContribution best{0, p[0] * q[0]};
  for (std::size_t d = 1; d < model.dim; ++d) {
    const double c = p[d] * q[d];
    if (c > best.contribution) best = {d, c};
  }
  return best;
}

Explanation explain_recommendation_feature(const mf::FactorModel& model, const LatentMapper& mapper,
                                           const RatingMatrix& matrix, std::size_t user, std::size_t song,
                                           std::size_t top_m) {
  if (mapper.dim() != model.dim) {
    throw Error(ErrorCode::kInvalidArgument, "mapper was fitted for a different latent dimension");
  }
  if (song >= matrix.song_count()) throw Error(ErrorCode::kUnknownSong, "song index out of range");
  const auto top = top_latent_dimension(model, user, song);
  Explanation out;
  out.song_id = matrix.song_id(song);
  out.kind = ExplanationKind::kFeature;
  out.latent_dimension = top.dimension;
  out.contribution = top.contribution;
  const auto& fit = mapper.dimensions[top.dimension];
  for (std::size_t a = 0; a < mapper.attribute_names.size(); ++a) {
    if (mapper.kept[a]) out.attributes.push_back({mapper.attribute_names[a], fit.coefficients[a]});
  }
  if (out.attributes.empty()) {
    throw Error(ErrorCode::kDegenerateDesign, "every attribute column was constant; no feature explanation");
  }
  std::stable_sort(out.attributes.begin(), out.attributes.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.importance) > std::abs(b.importance); });
  if (out.attributes.size() > top_m) out.attributes.resize(std::max<std::size_t>(top_m, 1));
  return out;
}

Explanation explain_recommendation_neighbor(const RatingMatrix& matrix, const cf::NeighborSet& neighbor_set,
                                            std::size_t song) {
  if (song >= matrix.song_count()) throw Error(ErrorCode::kUnknownSong, "song index out of range");
  Explanation out;
  out.song_id = matrix.song_id(song);
  out.kind = ExplanationKind::kNeighbor;
  for (const auto& n : neighbor_set.neighbors) {
    if (auto r = matrix.rating(n.user, song)) {
      out.neighbors.push_back({n.user, matrix.user_id(n.user), n.similarity, n.weight, static_cast<double>(*r)});
    }
  }
  return out;
}

std::string user_node_id(std::string_view user_id) { return "user:" + std::string(user_id); }
std::string song_node_id(std::string_view song_id) { return "song:" + std::string(song_id); }

NeighborGraph neighbor_graph(const RatingMatrix& matrix, const cf::NeighborSet& neighbor_set,
                             std::span<const std::uint32_t> recommended, const Catalog* catalog) {
  if (neighbor_set.neighbors.empty()) {
    throw Error(ErrorCode::kEmptyNeighborhood, "user '" + matrix.user_id(neighbor_set.target) + "' has no neighbours");
  }
  NeighborGraph out;
  auto& g = out.graph;
  const auto target_id = user_node_id(matrix.user_id(neighbor_set.target));
  g.nodes.push_back({target_id, "user", matrix.user_id(neighbor_set.target)});
  for (const auto& n : neighbor_set.neighbors) {
    g.nodes.push_back({user_node_id(matrix.user_id(n.user)), "neighbor", matrix.user_id(n.user)});
  }
  std::set<std::uint32_t> seen;
  std::vector<std::uint32_t> songs;
  for (auto s : recommended) {
    if (s >= matrix.song_count()) throw Error(ErrorCode::kUnknownSong, "song index out of range");
    if (seen.insert(s).second) songs.push_back(s);
  }
  for (auto s : songs) {
    const auto& sid = matrix.song_id(s);
    std::string label = sid;
    if (catalog != nullptr) {
      if (const auto* attrs = catalog->find(sid); attrs != nullptr && !attrs->title.empty()) label = attrs->title;
    }
    g.nodes.push_back({song_node_id(sid), "song", label});
  }
  for (const auto& n : neighbor_set.neighbors) {
    g.edges.push_back({target_id, user_node_id(matrix.user_id(n.user)), n.similarity, "similarity"});
  }
  for (const auto& n : neighbor_set.neighbors) {
    for (auto s : songs) {
      if (auto r = matrix.rating(n.user, s)) {
        g.edges.push_back(
            {user_node_id(matrix.user_id(n.user)), song_node_id(matrix.song_id(s)), static_cast<double>(*r), "rating"});
      }
    }
  }
  for (auto s : songs) out.explanations.push_back(explain_recommendation_neighbor(matrix, neighbor_set, s));
  return out;
}

}  // namespace explore::explain
