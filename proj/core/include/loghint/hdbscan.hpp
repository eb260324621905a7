#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "loghint/partition.hpp"

namespace loghint {

struct HdbscanParams {
    int min_cluster_size = 25;
    int min_samples = 12;
};

struct HdbscanResult {
    std::vector<int> labels;  // cluster id or kNoise
    int cluster_count = 0;
    bool degenerate = false;  // identical points, or too few to cluster
};

/// Density clustering: mutual-reachability distances (core distance at
/// min_samples), Prim MST, condensed tree at min_cluster_size, and
/// stability-based cluster selection with the root selectable so degenerate
/// single-cluster inputs resolve to one cluster. Deterministic: all ties
/// break by point index.
HdbscanResult hdbscan(const std::vector<std::vector<double>>& points, int min_cluster_size,
                      int min_samples);

struct GridCell {
    int mcs = 0;
    int ms = 0;
    double silhouette = -1.0;          // -1 when fewer than 2 clusters
    std::optional<double> dbi;
    int clusters = 0;
    double coverage = 0.0;
};

struct GridSearchResult {
    HdbscanParams best;
    HdbscanResult clustering;
    std::vector<GridCell> report;
    bool degenerate_warning = false;  // every cell scored -1
};

/// mcs grid for n files: n/300, n/150, {25, 40, 50, 75, 100}, n/10 — rounded,
/// clipped to >= 2, deduplicated; ms in {0.5, 0.25} x mcs, rounded, >= 1.
std::vector<std::pair<int, int>> hdbscan_grid_cells(int n_files);

/// Evaluate every grid cell (cells run in parallel), select by maximal
/// silhouette, then minimal DBI, then larger coverage, then smaller mcs/ms.
GridSearchResult hdbscan_grid_search(const std::vector<std::vector<double>>& points, int n_files);

struct AriSummary {
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> values;
};

/// Resample with replacement, re-cluster, and compare against the reference
/// partition on the unique resampled points via ARI.
AriSummary bootstrap_stability(const std::vector<std::vector<double>>& points,
                               const HdbscanParams& params, int iterations, std::uint64_t seed);

}  // namespace loghint
