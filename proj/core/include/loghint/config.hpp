#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "loghint/embed.hpp"
#include "loghint/predictor.hpp"
#include "loghint/retrieval.hpp"

namespace loghint {

/// Tool configuration; a JSON key-value tree with unknown keys rejected.
/// LOGHINT_EMBED_ENDPOINT, LOGHINT_LLM_ENDPOINT and LOGHINT_API_KEY override
/// the endpoint and credential fields.
struct Config {
    std::vector<std::string> extensions{".java"};
    std::string logger_pattern;
    int context_window = 10;
    std::vector<std::string> level_scale;  // empty -> default scale
    std::map<std::string, std::string> components;  // path prefix -> label

    double half_life_days = 365.0;
    int knn_k = 20;
    int reduce_dim = 50;
    std::vector<double> resolutions;  // empty -> defaults
    double target_modularity = 0.7;
    int min_community_size = 10;
    ScoreWeights weights;
    std::uint64_t seed = 1;

    bool ann_enabled = false;
    double nprobe_fraction = 0.9;

    EmbeddingProviderConfig embedding;
    LlmClientConfig llm;

    CorpusConfig corpus_config() const;
    RetrievalOptions retrieval_options() const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Config load_config(const std::filesystem::path& file);
Config parse_config(const std::string& json_text);
void apply_env_overrides(Config& config);

}  // namespace loghint
