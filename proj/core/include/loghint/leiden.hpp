#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "loghint/graph.hpp"
#include "loghint/partition.hpp"

namespace loghint {

/// Leiden community detection on a weighted graph: alternating local moving,
/// refinement, and aggregation until modularity stops improving. Communities
/// are internally connected; labels contiguous, ordered by smallest member.
/// No minimum-size handling here (tune_resolution applies it).
Partition leiden(const WeightedGraph& graph, double resolution, std::uint64_t seed,
                 ClusterMode mode = ClusterMode::ownership);

/// Label vector variant used by the clustering pipeline.
std::vector<int> leiden_labels(const WeightedGraph& graph, double resolution, std::uint64_t seed);

struct ResolutionRun {
    double resolution = 0.0;
    double modularity_value = 0.0;
    int clusters = 0;
};

struct TuneResult {
    double resolution = 0.0;
    Partition partition;
    std::vector<ResolutionRun> runs;
    bool target_met = false;
};

inline std::vector<double> default_resolutions() { return {0.5, 0.8, 1.0, 1.2, 1.5, 2.0}; }

/// Smallest listed resolution whose modularity reaches the target, else the
/// maximum-modularity run (flag "target_modularity_missed"). Communities
/// below min_community_size are relabeled NOISE afterwards.
TuneResult tune_resolution(const WeightedGraph& graph, std::vector<double> resolutions,
                           double target_modularity, std::uint64_t seed,
                           int min_community_size = 10,
                           ClusterMode mode = ClusterMode::ownership);

/// Multiplex Leiden: the objective is the layer-weight-weighted sum of
/// per-layer modularities. Zero-weight or empty layers drop out (single
/// layer left reduces exactly to leiden()). Nodes isolated in every layer
/// are NOISE; min_community_size relabeling as in tune_resolution.
Partition multiplex_leiden(const MultiplexGraph& layers,
                           std::pair<double, double> layer_weights, double resolution,
                           std::uint64_t seed, int min_community_size = 10);

}  // namespace loghint
