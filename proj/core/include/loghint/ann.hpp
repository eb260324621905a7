#pragma once

#include <cstdint>
#include <vector>

namespace loghint {

/// Inverted-file flat index over inner-product scores: a spherical k-means
/// coarse quantizer with per-centroid posting lists. Probing every list is
/// the exhaustive regime and reproduces exact search.
class IvfIndex {
public:
    /// `vectors[i]` is the vector for external id `ids[i]`; expected to be
    /// L2-normalized (cosine == dot).
    void build(const std::vector<std::vector<double>>& vectors, const std::vector<int>& ids,
               std::uint64_t seed, int kmeans_iters = 8);

    bool empty() const { return lists_.empty(); }
    int nlist() const { return static_cast<int>(centroids_.size()); }

    /// External ids from the nprobe closest lists, query order deterministic.
    std::vector<int> probe(const std::vector<double>& query, int nprobe) const;

private:
    std::vector<std::vector<double>> centroids_;
    std::vector<std::vector<int>> lists_;
};

}  // namespace loghint
