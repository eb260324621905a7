#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loghint/corpus.hpp"

namespace loghint {

struct EmbeddingSet {
    std::vector<std::string> files;  // corpus order
    int dim = 0;
    std::vector<std::vector<double>> vectors;
    std::string provider_id;
    int reduced_dim = 0;
    std::vector<std::vector<double>> reduced;  // empty until reduce() runs
    std::string corpus_hash;                   // binding; empty when unbound
    std::vector<std::string> failed_files;     // excluded from the semantic layer
};

struct EmbeddingProviderConfig {
    enum class Kind { local_hash, remote_http };
    Kind kind = Kind::local_hash;
    std::string endpoint;    // remote only
    std::string model_name = "local-hash-tf";
    std::string api_key;     // optional bearer token
    int max_tokens = 32768;  // provider input window
    int dim = 256;           // local_hash output dimension
    int batch_size = 16;
    int max_in_flight = 4;   // concurrent remote requests
    int max_attempts = 3;    // per-batch attempts with exponential backoff
    int backoff_initial_ms = 100;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual int dim() const = 0;
    /// Embed a batch of inputs; throws EmbeddingError on transport failure.
    virtual std::vector<std::vector<double>> embed_batch(std::span<const std::string> inputs) = 0;

    std::vector<double> embed(std::string_view input);
};

struct EmbeddingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Hash-TF embedding: identifier/word tokens hashed into `dim` buckets,
/// term-frequency accumulated, L2-normalized. Empty source gives the zero
/// vector. Deterministic test substitute for a remote model.
std::vector<double> local_hash_embedding(std::string_view source, int dim);

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderConfig& config);

/// Whitespace/identifier-boundary token count used against the provider
/// window; model tokenizers are provider-specific so this is approximate.
int approx_token_count(std::string_view source);

/// Split a file at top-level method boundaries; preamble/trailing text forms
/// its own chunk. Sources without methods fall back to fixed-size line
/// blocks. Every chunk fits within max_tokens (oversize methods re-split).
std::vector<std::string> chunk_source(std::string_view source, int max_tokens);

/// Whole-file embedding when it fits the window, otherwise the mean of the
/// chunk embeddings.
std::vector<double> embed_file(std::string_view source, EmbeddingProvider& provider,
                               int max_tokens);

/// Disk cache keyed by (provider id, content hash).
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {}
    std::optional<std::vector<double>> get(const std::string& provider_id,
                                           const std::string& content_hash) const;
    void put(const std::string& provider_id, const std::string& content_hash,
             const std::vector<double>& vec) const;

private:
    std::filesystem::path dir_;
};

/// Per-file embeddings for the whole corpus. File contents are reread from
/// `repo` when given, else from `sources` (corpus order). Failed files are
/// recorded and excluded from the semantic layer downstream.
EmbeddingSet embed_corpus(const Corpus& corpus, const std::vector<std::string>& sources,
                          EmbeddingProvider& provider, const EmbeddingProviderConfig& config,
                          const EmbeddingCache* cache = nullptr);

}  // namespace loghint
