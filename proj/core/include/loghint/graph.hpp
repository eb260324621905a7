#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace loghint {

struct WeightedEdge {
    int u = 0;
    int v = 0;       // u < v
    double w = 0.0;  // > 0

    bool operator==(const WeightedEdge&) const = default;
};

/// Undirected weighted graph over nodes 0..node_count-1, no self-loops,
/// edges stored once with u < v.
struct WeightedGraph {
    int node_count = 0;
    std::vector<WeightedEdge> edges;

    double total_weight() const;
    std::vector<double> weighted_degrees() const;
    /// Adjacency lists as (neighbor, weight) pairs.
    std::vector<std::vector<std::pair<int, double>>> adjacency() const;
};

/// Shared node set with one edge set per layer (semantic, ownership).
struct MultiplexGraph {
    int node_count = 0;
    std::vector<WeightedGraph> layers;
};

/// Symmetrized kNN graph: an edge survives if it is in either endpoint's
/// top-k by similarity; zero-weight edges are dropped. `similarity(i, j)`
/// must be symmetric.
WeightedGraph knn_graph(int node_count, int k,
                        const std::function<double(int, int)>& similarity);

/// kNN graph over dense vectors (cosine), then min-max rescale of edge
/// weights to [0,1]; a constant-weight layer rescales to all ones.
WeightedGraph build_layer(const std::vector<std::vector<double>>& vectors, int k = 20);

/// Min-max rescale of edge weights to [0,1] in place.
void rescale_weights(WeightedGraph& g);

}  // namespace loghint
