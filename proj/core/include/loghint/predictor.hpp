#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "loghint/corpus.hpp"
#include "loghint/retrieval.hpp"

namespace loghint {

struct Prompt {
    std::string system_preamble;
    std::vector<std::pair<std::string, std::string>> examples;  // (context, level name)
    std::string target_context;
    std::vector<std::string> level_vocabulary;  // scale order, most verbose first

    /// Deterministic template; byte-identical for identical inputs.
    std::string render() const;
};

/// Instruction + k example blocks in retrieval-rank order + masked target.
Prompt build_prompt(const std::string& target_context, const RetrievalResult& retrieval,
                    const Corpus& corpus, const LevelScale& scale);

struct LlmResponse {
    bool ok = false;
    std::string text;
    std::vector<std::pair<std::string, double>> token_logprobs;  // (token, logprob)
    std::string error;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string id() const = 0;
    virtual LlmResponse complete(const Prompt& prompt, const std::string& target_id) = 0;
};

/// Deterministic end-to-end test double: answers with the majority level of
/// the prompt examples, ties broken toward the more verbose level, "info"
/// when there are no examples.
class MockMajorityClient final : public LlmClient {
public:
    std::string id() const override { return "mock_majority"; }
    LlmResponse complete(const Prompt& prompt, const std::string& target_id) override;
};

/// Answers with the recorded ground-truth level per statement id.
class MockOracleClient final : public LlmClient {
public:
    explicit MockOracleClient(std::map<std::string, std::string> truth)
        : truth_(std::move(truth)) {}
    std::string id() const override { return "mock_oracle"; }
    LlmResponse complete(const Prompt& prompt, const std::string& target_id) override;

private:
    std::map<std::string, std::string> truth_;
};

struct LlmClientConfig {
    enum class Kind { remote_chat, mock_majority, mock_oracle };
    Kind kind = Kind::mock_majority;
    std::string endpoint;
    std::string model_name;
    std::string api_key;
    double temperature = 0.0;
    int max_retries = 3;
    int backoff_initial_ms = 100;
};

/// OpenAI-compatible chat endpoint; consumes token logprobs when present.
class RemoteChatClient final : public LlmClient {
public:
    explicit RemoteChatClient(LlmClientConfig config) : cfg_(std::move(config)) {}
    std::string id() const override { return "remote:" + cfg_.model_name; }
    LlmResponse complete(const Prompt& prompt, const std::string& target_id) override;

private:
    LlmClientConfig cfg_;
};

std::unique_ptr<LlmClient> make_client(const LlmClientConfig& config,
                                       std::map<std::string, std::string> oracle_truth = {});

struct PredictionRecord {
    std::string statement_id;
    int predicted = 0;
    std::vector<double> class_scores;  // over the scale, sums to 1
    bool parse_failed = false;
    bool scores_from_logprobs = false;
    RetrievalResult retrieval;
    std::string client_id;
};

/// First level-vocabulary token of the response, case-insensitive.
std::optional<int> parse_level(std::string_view response, const LevelScale& scale);

/// Ask the client, parse, and score. Unparsable responses after max_attempts
/// fall back to `fallback_level` (the retrieval pool's majority level) and
/// are flagged as parse failures.
PredictionRecord predict_level(const Prompt& prompt, LlmClient& client, const LevelScale& scale,
                               const std::string& target_id, int fallback_level,
                               int max_attempts = 3);

}  // namespace loghint
