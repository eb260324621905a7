#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "loghint/config.hpp"
#include "loghint/corpus.hpp"
#include "loghint/evaluation.hpp"
#include "loghint/reduce.hpp"
#include "loghint/retrieval.hpp"

namespace loghint {

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scan + store; returns the stored corpus.
Corpus ingest_repo(const std::filesystem::path& repo, const std::filesystem::path& corpus_dir,
                   const Config& config);

/// Build and persist the clustering artifacts for one mode (or all three):
/// embeddings.json, ownership.jsonl, partition.<mode>.json.
void run_clustering(const std::filesystem::path& corpus_dir, const std::string& mode,
                    const Config& config);

/// Write index/manifest.json binding the index to the current artifacts.
void write_index_manifest(const std::filesystem::path& corpus_dir, const Config& config);

/// Everything needed to serve predictions. Owns the corpus and artifacts the
/// index points into.
struct LoadedPipeline {
    Corpus corpus;
    EmbeddingSet embeddings;
    OwnershipMatrix ownership;
    std::map<ClusterMode, Partition> partitions;
    std::unique_ptr<RetrievalIndex> index;
    Config config;
};

/// Load artifacts, verify the binding hashes, rebuild the in-memory index.
/// Missing artifacts raise PipelineError naming the prerequisite command.
std::unique_ptr<LoadedPipeline> load_pipeline(const std::filesystem::path& corpus_dir,
                                              const Config& config);

EmbeddingSet load_embeddings(const std::filesystem::path& corpus_dir);
void store_embeddings(const EmbeddingSet& set, const std::filesystem::path& corpus_dir);

struct PredictRequest {
    std::string file;
    std::optional<int> line;
    std::string message;
    std::string context;
    std::string mode = "multiplex";
    int k = 5;
    bool allow_fallback = true;
};

struct NotFoundError : PipelineError {
    using PipelineError::PipelineError;
};
struct BadRequestError : PipelineError {
    using PipelineError::PipelineError;
};

struct PredictOutcome {
    PredictionRecord record;
    std::string payload_json;  // canonical payload, no latency field
    double latency_ms = 0.0;
};

/// Single prediction path shared by the CLI and the HTTP service; the
/// payload is byte-identical across both for identical inputs and seeds.
PredictOutcome predict(LoadedPipeline& pipeline, const PredictRequest& request);

/// Evaluate per plan.json; writes report.json and report.md under corpus_dir.
EvaluationReport evaluate(const std::filesystem::path& corpus_dir,
                          const std::filesystem::path& plan_file, const Config& config);

ExperimentPlan load_plan(const std::filesystem::path& plan_file);

/// Temporal ownership stability over the stored corpus history.
StabilityResult run_stability(const std::filesystem::path& corpus_dir, const Config& config);
std::string stability_to_json(const StabilityResult& result);

}  // namespace loghint
