#include "loghint/predictor.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "loghint/extract.hpp"

namespace loghint {

std::string Prompt::render() const {
    std::ostringstream out;
    out << system_preamble << "\n";
    for (std::size_t i = 0; i < examples.size(); ++i) {
        out << "\n### Example " << (i + 1) << "\n";
        out << examples[i].first;
        if (examples[i].first.empty() || examples[i].first.back() != '\n') out << "\n";
        out << "Level: " << examples[i].second << "\n";
    }
    out << "\n### Target\n";
    out << target_context;
    if (target_context.empty() || target_context.back() != '\n') out << "\n";
    out << "Level:";
    return out.str();
}

Prompt build_prompt(const std::string& target_context, const RetrievalResult& retrieval,
                    const Corpus& corpus, const LevelScale& scale) {
    Prompt p;
    p.level_vocabulary = scale.names;
    std::ostringstream preamble;
    preamble << "You are choosing the verbosity level for the masked logging statement "
             << "(the " << kLevelMask << " token). Answer with exactly one level from:";
    for (const auto& name : scale.names) preamble << " " << name;
    preamble << ".";
    p.system_preamble = preamble.str();
    for (const auto& e : retrieval.examples) {
        const auto& st = corpus.statements[static_cast<std::size_t>(e.statement)];
        p.examples.emplace_back(st.context, st.level_name);
    }
    p.target_context = target_context;
    return p;
}

LlmResponse MockMajorityClient::complete(const Prompt& prompt, const std::string&) {
    LlmResponse res;
    res.ok = true;
    if (prompt.examples.empty()) {
        res.text = "info";
        return res;
    }
    // Majority level; ties go to the more verbose level (earlier in the
    // vocabulary, which is ordered most verbose first).
    std::vector<int> counts(prompt.level_vocabulary.size(), 0);
    for (const auto& [_, level] : prompt.examples) {
        for (std::size_t i = 0; i < prompt.level_vocabulary.size(); ++i)
            if (prompt.level_vocabulary[i] == level) ++counts[i];
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i)
        if (counts[i] > counts[best]) best = i;
    res.text = prompt.level_vocabulary[best];
    return res;
}

LlmResponse MockOracleClient::complete(const Prompt&, const std::string& target_id) {
    LlmResponse res;
    auto it = truth_.find(target_id);
    if (it == truth_.end()) {
        res.error = "no recorded truth for " + target_id;
        return res;
    }
    res.ok = true;
    res.text = it->second;
    return res;
}

LlmResponse RemoteChatClient::complete(const Prompt& prompt, const std::string&) {
    nlohmann::json body;
    body["model"] = cfg_.model_name;
    body["messages"] = nlohmann::json::array({
        nlohmann::json{{"role", "system"}, {"content", prompt.system_preamble}},
        nlohmann::json{{"role", "user"}, {"content", prompt.render()}},
    });
    body["temperature"] = cfg_.temperature;
    std::string payload = body.dump();

    LlmResponse res;
    int backoff = cfg_.backoff_initial_ms;
    for (int attempt = 0; attempt < std::max(1, cfg_.max_retries); ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        httplib::Client client(cfg_.endpoint);
        client.set_read_timeout(300, 0);
        httplib::Headers headers;
        if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
        auto http = client.Post("/v1/chat/completions", headers, payload, "application/json");
        if (!http) {
            res.error = "transport error: " + httplib::to_string(http.error());
            continue;
        }
        if (http->status != 200) {
            res.error = "http status " + std::to_string(http->status);
            continue;
        }
        try {
            auto j = nlohmann::json::parse(http->body);
            const auto& choice = j.at("choices").at(0);
            res.text = choice.at("message").at("content").get<std::string>();
            if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
                choice["logprobs"].contains("content") && !choice["logprobs"]["content"].empty()) {
                const auto& first = choice["logprobs"]["content"].at(0);
                if (first.contains("top_logprobs")) {
                    for (const auto& t : first["top_logprobs"]) {
                        res.token_logprobs.emplace_back(t.at("token").get<std::string>(),
                                                        t.at("logprob").get<double>());
                    }
                }
            }
            res.ok = true;
            return res;
        } catch (const nlohmann::json::exception& e) {
            res.error = std::string("bad response: ") + e.what();
        }
    }
    return res;
}

std::unique_ptr<LlmClient> make_client(const LlmClientConfig& config,
                                       std::map<std::string, std::string> oracle_truth) {
    switch (config.kind) {
        case LlmClientConfig::Kind::mock_majority:
            return std::make_unique<MockMajorityClient>();
        case LlmClientConfig::Kind::mock_oracle:
            return std::make_unique<MockOracleClient>(std::move(oracle_truth));
        case LlmClientConfig::Kind::remote_chat:
            if (config.endpoint.empty())
                throw std::runtime_error("remote chat client requires an endpoint");
            return std::make_unique<RemoteChatClient>(config);
    }
    return std::make_unique<MockMajorityClient>();
}

std::optional<int> parse_level(std::string_view response, const LevelScale& scale) {
    std::size_t i = 0;
    const std::size_t n = response.size();
    while (i < n) {
        while (i < n && !std::isalnum(static_cast<unsigned char>(response[i]))) ++i;
        std::size_t begin = i;
        while (i < n && std::isalnum(static_cast<unsigned char>(response[i]))) ++i;
        if (begin == i) break;
        if (auto level = scale.index_of(response.substr(begin, i - begin))) return level;
    }
    return std::nullopt;
}

namespace {

std::string trim_token(const std::string& t) {
    std::size_t b = 0, e = t.size();
    while (b < e && std::isspace(static_cast<unsigned char>(t[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(t[e - 1]))) --e;
    return t.substr(b, e - b);
}

}  // namespace

PredictionRecord predict_level(const Prompt& prompt, LlmClient& client, const LevelScale& scale,
                               const std::string& target_id, int fallback_level,
                               int max_attempts) {
    PredictionRecord rec;
    rec.statement_id = target_id;
    rec.client_id = client.id();
    rec.class_scores.assign(scale.size(), 0.0);

    std::optional<int> predicted;
    LlmResponse last;
    for (int attempt = 0; attempt < std::max(1, max_attempts) && !predicted; ++attempt) {
        last = client.complete(prompt, target_id);
        if (!last.ok) continue;
        predicted = parse_level(last.text, scale);
    }

    if (!predicted) {
        rec.parse_failed = true;
        rec.predicted = fallback_level;
        rec.class_scores[static_cast<std::size_t>(fallback_level)] = 1.0;
        return rec;
    }
    rec.predicted = *predicted;

    // Token-level likelihoods when the wire response carries them; otherwise
    // one-hot on the parsed level.
    double total = 0.0;
    std::vector<double> scores(scale.size(), 0.0);
    for (const auto& [token, logprob] : last.token_logprobs) {
        auto level = scale.index_of(trim_token(token));
        if (!level) continue;
        double p = std::exp(logprob);
        scores[static_cast<std::size_t>(*level)] += p;
        total += p;
    }
    if (total > 0.0) {
        for (double& s : scores) s /= total;
        rec.class_scores = scores;
        rec.scores_from_logprobs = true;
        // predicted stays the parsed text answer; scores may disagree on
        // argmax only when the response text and logprobs disagree.
        std::size_t argmax = 0;
        for (std::size_t i = 1; i < scores.size(); ++i)
            if (scores[i] > scores[argmax]) argmax = i;
        rec.predicted = static_cast<int>(argmax);
    } else {
        rec.class_scores[static_cast<std::size_t>(rec.predicted)] = 1.0;
    }
    return rec;
}

}  // namespace loghint
