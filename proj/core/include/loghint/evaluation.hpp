#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loghint/cluster_metrics.hpp"
#include "loghint/corpus.hpp"
#include "loghint/metrics.hpp"
#include "loghint/predictor.hpp"
#include "loghint/retrieval.hpp"

namespace loghint {

enum class EvalMode { zero_shot, global_random, doc_component, ownership, semantic, multiplex };

std::string to_string(EvalMode mode);
std::optional<EvalMode> eval_mode_from(std::string_view name);
std::vector<EvalMode> all_eval_modes();

struct ExperimentPlan {
    std::vector<EvalMode> modes{EvalMode::zero_shot,  EvalMode::global_random,
                                EvalMode::doc_component, EvalMode::ownership,
                                EvalMode::semantic,   EvalMode::multiplex};
    int k_examples = 5;
    double split_ratio = 0.7;
    int bootstraps = 5;
    std::uint64_t seed = 1;
};

struct SplitResult {
    std::vector<int> retrieval_pool;  // statement indices
    std::vector<int> test_set;
    std::vector<std::string> warnings;
};

/// Statement-level split, stratified by level (largest-remainder rounding);
/// levels with fewer than two statements go wholly to the retrieval pool.
SplitResult split_corpus(const Corpus& corpus, double ratio, std::uint64_t seed);

struct BootstrapRow {
    int bootstrap = 0;
    std::optional<double> auc;
    double precision = 0.0;
    double aod = 0.0;
    double fallback_rate = 0.0;
};

struct ModeReport {
    std::string mode;
    bool skipped = false;
    std::string skip_reason;
    std::vector<BootstrapRow> rows;
    std::optional<double> auc_mean, auc_std;
    double precision_mean = 0.0, precision_std = 0.0;
    double aod_mean = 0.0, aod_std = 0.0;
    double fallback_rate = 0.0;       // on the full test set
    double parse_failure_rate = 0.0;
    bool scores_from_logprobs = false;
    std::optional<PairedComparison> vs_global_random;
    // Misprediction analysis (partition-backed modes only).
    std::optional<double> adjacent_confusion;       // share of errors off by one level
    std::optional<double> noise_error_fraction;     // share of errors in NOISE files
    std::optional<double> files_covering_half_errors;  // minimal file share
    std::vector<double> item_scores;  // per-test-statement AOD items (not serialized)
    std::vector<int> predictions;     // per-test-statement predicted levels
};

struct ClusterQualityReport {
    std::string mode;
    int clusters = 0;
    double coverage = 1.0;
    std::optional<double> silhouette, dbi, dbcv, modularity_value;
    IntraInterCosine cosine;
    std::vector<std::string> flags;
};

struct EvaluationReport {
    ExperimentPlan plan;
    std::string corpus_hash;
    int retrieval_size = 0;
    int test_size = 0;
    std::string client_id;
    std::string paired_metric = "aod_item";
    std::vector<ModeReport> modes;
    std::vector<ClusterQualityReport> clustering;
    std::vector<std::string> warnings;
};

struct EvalArtifacts {
    std::map<ClusterMode, Partition> partitions;
    const EmbeddingSet* embeddings = nullptr;
    const OwnershipMatrix* ownership = nullptr;
};

struct RunOptions {
    RetrievalOptions retrieval;
    int max_attempts = 3;     // predictor parse retries
    unsigned max_in_flight = 0;  // 0 = hardware default
};

/// The full protocol: split, per-mode prediction over the test set, seeded
/// test-set bootstraps, paired statistics against global_random, fallback
/// rates, and the misprediction analysis.
EvaluationReport run_experiment(const ExperimentPlan& plan, const Corpus& corpus,
                                const EvalArtifacts& artifacts, LlmClient& client,
                                const RunOptions& options = {});

/// Deterministic JSON / markdown renderings of the report.
std::string report_to_json(const EvaluationReport& report);
std::string report_to_markdown(const EvaluationReport& report);

struct StabilityOptions {
    int window_months = 2;
    int windows = 15;
    double days_per_month = 30.0;
    DecayConfig decay;
    int knn_k = 20;
    std::vector<double> resolutions;  // empty -> defaults
    double target_modularity = 0.7;
    int min_community_size = 10;
    std::uint64_t seed = 1;
};

struct StabilityResult {
    std::vector<double> window_aris;  // consecutive-window ARIs
    double median_ari = 0.0;
    int windows_used = 0;
    std::vector<std::string> warnings;
};

/// Ownership partitions over consecutive commit windows (decay reference at
/// each window end); ARI between consecutive windows on the files committed
/// in both.
StabilityResult temporal_stability(std::span<const CommitRecord> commits,
                                   const std::vector<std::string>& files,
                                   const StabilityOptions& options = {});

}  // namespace loghint
