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
#include <span>
#include <string>
#include <vector>

#include "explore/catalog.hpp"
#include "explore/cf.hpp"
#include "explore/mf.hpp"
#include "explore/rating_matrix.hpp"

namespace explore::explain {

inline constexpr double kDefaultRidgePenalty = 1e-3;

struct DimensionFit {
  // Coefficients on standardized attributes; 0 for dropped columns.
  std::vector<double> coefficients;
  double intercept = 0.0;
  double fit_r2 = 0.0;

  bool operator==(const DimensionFit&) const = default;
};

// One ridge regression per latent dimension, from standardized song
// attributes to the song's item factor in that dimension.
struct LatentMapper {
  std::vector<std::string> attribute_names;
  std::vector<double> means;
  std::vector<double> stddevs;
  std::vector<bool> kept;  // false: constant column, dropped from the fit
  std::vector<DimensionFit> dimensions;
  double penalty = kDefaultRidgePenalty;
  std::vector<std::string> warnings;

  std::size_t dim() const { return dimensions.size(); }
  // Prediction of item factor `j` for raw (unstandardized) attributes.
  double predict(std::size_t j, std::span<const double> attributes) const;
  // Coefficients expressed on raw attribute units.
  std::vector<double> raw_coefficients(std::size_t j) const;
  double raw_intercept(std::size_t j) const;

  bool operator==(const LatentMapper&) const = default;
};

// Rows of `attributes` pair with rows of `targets` (n x dim, row-major).
// Throws InvalidArgument with fewer than attribute_count + 1 rows; constant
// columns are dropped and reported as DegenerateDesign warnings.
LatentMapper fit_latent_mappers(const std::vector<AttributeVector>& attributes, std::span<const double> targets,
                                std::size_t dim, double penalty = kDefaultRidgePenalty);

// Fits on every matrix song that has catalog attributes; songs without are
// skipped with a warning.
LatentMapper fit_latent_mappers(const mf::FactorModel& model, const RatingMatrix& matrix, const Catalog& catalog,
                                double penalty = kDefaultRidgePenalty);

struct LatentContribution {
  std::size_t dimension = 0;
  double contribution = 0.0;
};

// argmax_d p_u[d] * q_i[d], lowest d on ties. Throws UnknownUser/UnknownSong.
LatentContribution top_latent_dimension(const mf::FactorModel& model, std::size_t user, std::size_t song);

enum class ExplanationKind { kNeighbor, kFeature };

struct AttributeImportance {
  std::string attribute;
  double importance = 0.0;  // signed standardized coefficient

  bool operator==(const AttributeImportance&) const = default;
};

struct NeighborContribution {
  std::uint32_t user = 0;
  std::string user_id;
  double similarity = 0.0;
  double weight = 0.0;
  double rating = 0.0;  // the neighbour's rating of the explained song

  bool operator==(const NeighborContribution&) const = default;
};

struct Explanation {
  std::string song_id;
  ExplanationKind kind = ExplanationKind::kNeighbor;
  // FEATURE
  std::size_t latent_dimension = 0;
  double contribution = 0.0;
  std::vector<AttributeImportance> attributes;  // by |importance| descending
  // NEIGHBOR
  std::vector<NeighborContribution> neighbors;  // in neighbour-set order

  bool operator==(const Explanation&) const = default;
};

// Throws DegenerateDesign when the mapper kept no attribute.
Explanation explain_recommendation_feature(const mf::FactorModel& model, const LatentMapper& mapper,
                                           const RatingMatrix& matrix, std::size_t user, std::size_t song,
                                           std::size_t top_m);

// Neighbours from the set that rated `song`.
Explanation explain_recommendation_neighbor(const RatingMatrix& matrix, const cf::NeighborSet& neighbor_set,
                                            std::size_t song);

struct GraphNode {
  std::string id;
  std::string kind;  // "user" | "neighbor" | "song"
  std::string label;

  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  std::string src;
  std::string dst;
  double weight = 0.0;
  std::string kind;  // "similarity" | "rating"

  bool operator==(const GraphEdge&) const = default;
};

struct GraphPayload {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  bool operator==(const GraphPayload&) const = default;
};

std::string user_node_id(std::string_view user_id);
std::string song_node_id(std::string_view song_id);

struct NeighborGraph {
  GraphPayload graph;
  std::vector<Explanation> explanations;  // one per recommended song
};

// Target, every neighbour and every recommended song become nodes; edges
// are target->neighbour (raw similarity) and neighbour->song (rating).
// Song labels use catalog titles when available. Throws EmptyNeighborhood.
NeighborGraph neighbor_graph(const RatingMatrix& matrix, const cf::NeighborSet& neighbor_set,
                             std::span<const std::uint32_t> recommended, const Catalog* catalog = nullptr);

}  // namespace explore::explain
