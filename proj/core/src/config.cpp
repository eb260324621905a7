#include "loghint/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace loghint {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key))
            throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
}

}  // namespace

CorpusConfig Config::corpus_config() const {
    CorpusConfig c;
    c.extensions = extensions;
    c.logger_pattern = logger_pattern;
    c.context_window = context_window;
    if (!level_scale.empty()) c.scale.names = level_scale;
    c.component_prefixes = components;
    return c;
}

RetrievalOptions Config::retrieval_options() const {
    RetrievalOptions o;
    o.weights = weights;
    o.use_ann = ann_enabled;
    o.nprobe_fraction = nprobe_fraction;
    return o;
}

Config parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Config c;
    reject_unknown(j, {"extensions", "logger_pattern", "context_window", "level_scale",
                       "components", "half_life_days", "knn_k", "reduce_dim", "resolutions",
                       "target_modularity", "min_community_size", "score_weights", "seed",
                       "ann", "embedding", "llm"},
                   "");
    try {
        if (j.contains("extensions")) c.extensions = j["extensions"].get<std::vector<std::string>>();
        if (j.contains("logger_pattern")) c.logger_pattern = j["logger_pattern"].get<std::string>();
        if (j.contains("context_window")) c.context_window = j["context_window"].get<int>();
        if (j.contains("level_scale")) c.level_scale = j["level_scale"].get<std::vector<std::string>>();
        if (j.contains("components"))
            c.components = j["components"].get<std::map<std::string, std::string>>();
        if (j.contains("half_life_days")) c.half_life_days = j["half_life_days"].get<double>();
        if (j.contains("knn_k")) c.knn_k = j["knn_k"].get<int>();
        if (j.contains("reduce_dim")) c.reduce_dim = j["reduce_dim"].get<int>();
        if (j.contains("resolutions")) c.resolutions = j["resolutions"].get<std::vector<double>>();
        if (j.contains("target_modularity"))
            c.target_modularity = j["target_modularity"].get<double>();
        if (j.contains("min_community_size"))
            c.min_community_size = j["min_community_size"].get<int>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();

        if (j.contains("score_weights")) {
            const auto& w = j["score_weights"];
            reject_unknown(w, {"semantic", "ownership"}, "score_weights");
            if (w.contains("semantic")) c.weights.semantic = w["semantic"].get<double>();
            if (w.contains("ownership")) c.weights.ownership = w["ownership"].get<double>();
        }
        if (j.contains("ann")) {
            const auto& a = j["ann"];
            reject_unknown(a, {"enabled", "nprobe_fraction"}, "ann");
            if (a.contains("enabled")) c.ann_enabled = a["enabled"].get<bool>();
            if (a.contains("nprobe_fraction"))
                c.nprobe_fraction = a["nprobe_fraction"].get<double>();
        }
        if (j.contains("embedding")) {
            const auto& e = j["embedding"];
            reject_unknown(e, {"kind", "endpoint", "model", "api_key", "max_tokens", "dim",
                               "batch_size", "max_in_flight"},
                           "embedding");
            if (e.contains("kind")) {
                std::string kind = e["kind"].get<std::string>();
                if (kind == "local_hash")
                    c.embedding.kind = EmbeddingProviderConfig::Kind::local_hash;
                else if (kind == "remote_http")
                    c.embedding.kind = EmbeddingProviderConfig::Kind::remote_http;
                else
                    throw ConfigError("embedding.kind must be local_hash or remote_http");
            }
            if (e.contains("endpoint")) c.embedding.endpoint = e["endpoint"].get<std::string>();
            if (e.contains("model")) c.embedding.model_name = e["model"].get<std::string>();
            if (e.contains("api_key")) c.embedding.api_key = e["api_key"].get<std::string>();
            if (e.contains("max_tokens")) c.embedding.max_tokens = e["max_tokens"].get<int>();
            if (e.contains("dim")) c.embedding.dim = e["dim"].get<int>();
            if (e.contains("batch_size")) c.embedding.batch_size = e["batch_size"].get<int>();
            if (e.contains("max_in_flight"))
                c.embedding.max_in_flight = e["max_in_flight"].get<int>();
        }
        if (j.contains("llm")) {
            const auto& l = j["llm"];
            reject_unknown(l, {"kind", "endpoint", "model", "api_key", "temperature",
                               "max_retries"},
                           "llm");
            if (l.contains("kind")) {
                std::string kind = l["kind"].get<std::string>();
                if (kind == "mock_majority")
                    c.llm.kind = LlmClientConfig::Kind::mock_majority;
                else if (kind == "mock_oracle")
                    c.llm.kind = LlmClientConfig::Kind::mock_oracle;
                else if (kind == "remote_chat")
                    c.llm.kind = LlmClientConfig::Kind::remote_chat;
                else
                    throw ConfigError("llm.kind must be mock_majority, mock_oracle or remote_chat");
            }
            if (l.contains("endpoint")) c.llm.endpoint = l["endpoint"].get<std::string>();
            if (l.contains("model")) c.llm.model_name = l["model"].get<std::string>();
            if (l.contains("api_key")) c.llm.api_key = l["api_key"].get<std::string>();
            if (l.contains("temperature")) c.llm.temperature = l["temperature"].get<double>();
            if (l.contains("max_retries")) c.llm.max_retries = l["max_retries"].get<int>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }

    if (c.weights.semantic < 0 || c.weights.ownership < 0 ||
        std::abs(c.weights.semantic + c.weights.ownership - 1.0) > 1e-9)
        throw ConfigError("score_weights must be non-negative and sum to 1");
    if (c.half_life_days <= 0) throw ConfigError("half_life_days must be positive");
    return c;
}

Config load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    Config c = parse_config(ss.str());
    apply_env_overrides(c);
    return c;
}

void apply_env_overrides(Config& config) {
    if (const char* v = std::getenv("LOGHINT_EMBED_ENDPOINT")) config.embedding.endpoint = v;
    if (const char* v = std::getenv("LOGHINT_LLM_ENDPOINT")) config.llm.endpoint = v;
    if (const char* v = std::getenv("LOGHINT_API_KEY")) {
        config.embedding.api_key = v;
        config.llm.api_key = v;
    }
}

}  // namespace loghint
