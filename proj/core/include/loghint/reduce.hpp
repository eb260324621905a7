#pragma once

#include <memory>
#include <vector>

#include "loghint/embed.hpp"

namespace loghint {

/// Dimensionality-reduction slot. PCA is the shipped default; a
/// neighbor-embedding reducer can be plugged in behind the same interface.
class Reducer {
public:
    virtual ~Reducer() = default;
    virtual std::string id() const = 0;
    virtual std::vector<std::vector<double>> reduce(
        const std::vector<std::vector<double>>& vectors, int target_dim) = 0;
};

/// Centered PCA, top components by variance, deterministic sign convention.
class PcaReducer final : public Reducer {
public:
    std::string id() const override { return "pca"; }
    std::vector<std::vector<double>> reduce(const std::vector<std::vector<double>>& vectors,
                                            int target_dim) override;
    /// Rank observed by the last reduce() call; below target_dim means the
    /// output was zero-padded.
    int last_effective_rank = 0;
};

struct ReduceInfo {
    int effective_rank = 0;
    bool padded = false;
    std::string reducer_id;
};

/// Fill `set.reduced` with target_dim columns. Requires target_dim < dim and
/// at least target_dim + 1 files.
ReduceInfo reduce_embeddings(EmbeddingSet& set, int target_dim = 50, Reducer* reducer = nullptr);

}  // namespace loghint
