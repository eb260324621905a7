#pragma once

#include <optional>
#include <span>
#include <vector>

#include "loghint/graph.hpp"

namespace loghint {

/// Euclidean silhouette over non-noise points; nullopt below 2 clusters.
std::optional<double> silhouette_score(const std::vector<std::vector<double>>& points,
                                       std::span<const int> labels);

/// Davies-Bouldin with centroid dispersion, non-noise points only.
std::optional<double> davies_bouldin_index(const std::vector<std::vector<double>>& points,
                                           std::span<const int> labels);

/// Density-based cluster validity (Moulavi et al.): compactness via density
/// sparseness against separation between density regions. Noise points stay
/// in the denominator weight, pulling the score toward 0.
std::optional<double> dbcv_score(const std::vector<std::vector<double>>& points,
                                 std::span<const int> labels);

/// Newman-Girvan weighted modularity with resolution multiplier on the null
/// term. Noise labels count as singleton communities.
double modularity(const WeightedGraph& g, std::span<const int> labels, double resolution = 1.0);

/// Layer-weighted sum of per-layer modularities; empty layers contribute 0.
double multiplex_modularity(const MultiplexGraph& layers, std::span<const int> labels,
                            std::span<const double> layer_weights, double resolution = 1.0);

/// Intra/inter cluster cosine similarity under both averaging conventions
/// (the global pair mean and the per-cluster mean of means).
struct IntraInterCosine {
    std::optional<double> intra_global;
    std::optional<double> intra_per_cluster;
    std::optional<double> inter_global;
    std::optional<double> inter_per_pair;
};
IntraInterCosine intra_inter_cosine(const std::function<double(int, int)>& similarity,
                                    std::span<const int> labels);

}  // namespace loghint
