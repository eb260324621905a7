#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "loghint/ann.hpp"
#include "loghint/corpus.hpp"
#include "loghint/embed.hpp"
#include "loghint/ownership.hpp"
#include "loghint/partition.hpp"

namespace loghint {

struct ScoreWeights {
    double semantic = 0.7;
    double ownership = 0.3;
};

/// The combined similarity: w_sem * cos_sem + w_own * cos_own.
double combined_score(double cos_sem, double cos_own, const ScoreWeights& weights);

struct RetrievalOptions {
    ScoreWeights weights;
    bool partial_fill = false;   // pad an undersized cluster instead of full fallback
    bool use_ann = false;        // default path; retrieve() can override per call
    double nprobe_fraction = 0.9;  // recall-oriented probe breadth
    int kmeans_iters = 8;
};

struct RetrievedExample {
    int statement = -1;  // index into corpus statements
    double score = 0.0;
};

struct RetrievalResult {
    std::vector<RetrievedExample> examples;  // scores non-increasing
    std::string mode;
    bool fallback_used = false;
    int cluster_id = kNoise;
    double latency_ms = 0.0;
};

struct RetrievalQuery {
    std::string file;
    std::string statement_id;  // seeds the fallback stream; target file excluded
};

struct RetrievalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Immutable retrieval structures for one corpus: per-mode cluster candidate
/// lists with exact scorers and IVF probes, plus the whole-project fallback
/// pool (noise files included there). Safe for concurrent retrieve calls.
class RetrievalIndex {
public:
    /// `candidate_statements` restricts the example pool (the retrieval
    /// split); nullptr admits every statement. Artifacts carrying a corpus
    /// hash must match the corpus, otherwise the build refuses.
    static RetrievalIndex build(const Corpus& corpus,
                                const std::map<ClusterMode, Partition>& partitions,
                                const EmbeddingSet& embeddings, const OwnershipMatrix& ownership,
                                std::uint64_t seed, RetrievalOptions options = {},
                                const std::vector<int>* candidate_statements = nullptr);

    /// Cluster retrieval for the query file under `mode`; NOISE files,
    /// unknown files, and undersized clusters fall back to seeded uniform
    /// sampling over the whole pool (minus the target file).
    RetrievalResult retrieve(const RetrievalQuery& query, ClusterMode mode, int k = 5) const;
    RetrievalResult retrieve(const RetrievalQuery& query, ClusterMode mode, int k,
                             bool use_ann) const;

    /// Uniform sampling baseline over the whole pool (not flagged as
    /// fallback: here sampling is the policy).
    RetrievalResult sample_uniform(const RetrievalQuery& query, int k = 5) const;

    /// Documentation-component baseline: uniform over same-component
    /// statements; unknown components trigger fallback.
    RetrievalResult retrieve_component(const RetrievalQuery& query, int k = 5) const;

    struct AnnCheckReport {
        int targets = 0;
        int mismatched = 0;
        double mismatch_rate = 0.0;
    };
    /// Compare exact vs probed top-k sets over sampled target statements.
    AnnCheckReport exact_vs_ann_check(std::span<const int> statement_indices, ClusterMode mode,
                                      int k = 5) const;

    const Corpus& corpus() const { return *corpus_; }
    std::uint64_t seed() const { return seed_; }
    const RetrievalOptions& options() const { return options_; }
    int cluster_of(ClusterMode mode, const std::string& file) const;  // kNoise when absent
    int candidate_count(ClusterMode mode, int cluster, const std::string& exclude_file) const;
    const std::vector<int>& pool() const { return pool_; }
    bool has_mode(ClusterMode mode) const { return buckets_.count(mode) > 0; }

private:
    struct Bucket {
        std::vector<int> files;  // file indices holding >= 1 candidate statement
        int statement_count = 0;
        IvfIndex ann;
    };

    const Corpus* corpus_ = nullptr;
    std::uint64_t seed_ = 0;
    RetrievalOptions options_;
    std::unordered_map<std::string, int> file_index_;
    std::map<ClusterMode, std::vector<int>> assignments_;
    std::map<ClusterMode, std::vector<Bucket>> buckets_;
    std::vector<std::vector<double>> sem_norm_;      // per file, unit length
    std::vector<OwnershipRow> own_norm_;             // per file, unit length
    std::vector<std::vector<double>> own_sig_;       // hashed dense signature
    std::vector<std::vector<int>> file_statements_;  // candidate statements per file
    std::vector<int> pool_;                          // all candidate statements
    std::map<std::string, std::vector<int>> component_files_;

    double score(ClusterMode mode, int target_file, int candidate_file) const;
    std::vector<double> ann_vector(ClusterMode mode, int file) const;
    RetrievalResult fallback(const RetrievalQuery& query, int k, const std::string& mode_name,
                             bool flag_fallback) const;
    void sample_into(RetrievalResult& out, const std::vector<int>& statements,
                     const std::string& exclude_file, int k, std::uint64_t stream) const;
};

}  // namespace loghint
