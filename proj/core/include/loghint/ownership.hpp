#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loghint/corpus.hpp"
#include "loghint/graph.hpp"

namespace loghint {

struct DecayConfig {
    double half_life_days = 365.0;
};

/// Sparse author weights for one file: sorted (author index, weight) pairs.
using OwnershipRow = std::vector<std::pair<int, double>>;

struct OwnershipMatrix {
    std::vector<std::string> files;    // row order, matches the corpus
    std::vector<std::string> authors;  // sorted, deduplicated
    std::vector<OwnershipRow> rows;
    std::int64_t reference_time = 0;
    int ignored_paths = 0;  // commit paths not in `files`
};

/// weight(f, a) = sum over commits by `a` touching `f` of
/// 0.5^(age_days / half_life_days), ages measured from `reference_time`.
OwnershipMatrix build_ownership_matrix(std::span<const CommitRecord> commits,
                                       const std::vector<std::string>& files,
                                       const DecayConfig& decay,
                                       std::int64_t reference_time);

/// Cosine over dense vectors; 0 when either vector is zero.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
/// Cosine over sparse rows; 0 when either row is empty.
double cosine_similarity(const OwnershipRow& u, const OwnershipRow& v);

/// File-to-file graph over ownership rows: top-k cosine edges per file,
/// union-symmetrized, zero-weight edges dropped.
WeightedGraph ownership_knn_graph(const OwnershipMatrix& matrix, int k = 20);

void write_ownership_jsonl(const OwnershipMatrix& matrix, const std::filesystem::path& file);

}  // namespace loghint
