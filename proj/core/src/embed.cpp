#include "loghint/embed.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "loghint/extract.hpp"
#include "loghint/parallel.hpp"
#include "loghint/rng.hpp"
#include "loghint/sha256.hpp"

namespace loghint {

std::vector<double> EmbeddingProvider::embed(std::string_view input) {
    std::vector<std::string> one{std::string(input)};
    return embed_batch(one).at(0);
}

int approx_token_count(std::string_view source) {
    int count = 0;
    bool in_word = false;
    for (char c : source) {
        bool word = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        if (word && !in_word) ++count;
        if (!word && !std::isspace(static_cast<unsigned char>(c))) ++count;  // punctuation
        in_word = word;
    }
    return count;
}

std::vector<double> local_hash_embedding(std::string_view source, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    std::size_t i = 0;
    const std::size_t n = source.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(source[i]);
        if (!(std::isalnum(c) || c == '_')) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        while (i < n && (std::isalnum(static_cast<unsigned char>(source[i])) || source[i] == '_')) ++i;
        std::uint64_t h = Rng::hash_string(source.substr(begin, i - begin));
        v[h % static_cast<std::uint64_t>(dim)] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

namespace {

class LocalHashProvider final : public EmbeddingProvider {
public:
    explicit LocalHashProvider(int dim) : dim_(dim) {}
    std::string id() const override { return "local-hash-tf-" + std::to_string(dim_); }
    int dim() const override { return dim_; }
    std::vector<std::vector<double>> embed_batch(std::span<const std::string> inputs) override {
        std::vector<std::vector<double>> out;
        out.reserve(inputs.size());
        for (const auto& s : inputs) out.push_back(local_hash_embedding(s, dim_));
        return out;
    }

private:
    int dim_;
};

class RemoteHttpProvider final : public EmbeddingProvider {
public:
    explicit RemoteHttpProvider(EmbeddingProviderConfig cfg) : cfg_(std::move(cfg)) {}

    std::string id() const override { return "remote:" + cfg_.model_name; }
    int dim() const override { return cfg_.dim; }

    std::vector<std::vector<double>> embed_batch(std::span<const std::string> inputs) override {
        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["input"] = std::vector<std::string>(inputs.begin(), inputs.end());
        std::string payload = body.dump();

        std::string last_error;
        int backoff = cfg_.backoff_initial_ms;
        for (int attempt = 0; attempt < std::max(1, cfg_.max_attempts); ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
            httplib::Client client(cfg_.endpoint);
            client.set_read_timeout(120, 0);
            httplib::Headers headers;
            if (!cfg_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + cfg_.api_key);
            auto res = client.Post("/v1/embeddings", headers, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "http status " + std::to_string(res->status);
                continue;
            }
            try {
                auto j = nlohmann::json::parse(res->body);
                std::vector<std::vector<double>> out;
                for (const auto& item : j.at("data"))
                    out.push_back(item.at("embedding").get<std::vector<double>>());
                if (out.size() != inputs.size())
                    throw EmbeddingError("embedding count mismatch");
                return out;
            } catch (const nlohmann::json::exception& e) {
                last_error = std::string("bad response: ") + e.what();
            }
        }
        throw EmbeddingError("embedding request failed after retries: " + last_error);
    }

private:
    EmbeddingProviderConfig cfg_;
};

// Fixed-size line blocks, each within max_tokens (single oversize lines pass
// through whole).
std::vector<std::string> chunk_source_lines(std::string_view source, int max_tokens) {
    std::vector<std::string> out;
    std::string current;
    int current_tokens = 0;
    std::size_t pos = 0;
    while (pos < source.size()) {
        std::size_t nl = source.find('\n', pos);
        std::size_t end = (nl == std::string_view::npos) ? source.size() : nl + 1;
        std::string_view line = source.substr(pos, end - pos);
        int line_tokens = approx_token_count(line);
        if (!current.empty() && current_tokens + line_tokens > max_tokens) {
            out.push_back(std::move(current));
            current.clear();
            current_tokens = 0;
        }
        current += line;
        current_tokens += line_tokens;
        pos = end;
    }
    if (!current.empty()) out.push_back(std::move(current));
    if (out.empty()) out.emplace_back();
    return out;
}

}  // namespace

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderConfig& config) {
    if (config.kind == EmbeddingProviderConfig::Kind::local_hash)
        return std::make_unique<LocalHashProvider>(config.dim);
    if (config.endpoint.empty())
        throw EmbeddingError("remote embedding provider requires an endpoint");
    return std::make_unique<RemoteHttpProvider>(config);
}

std::vector<std::string> chunk_source(std::string_view source, int max_tokens) {
    auto blocks = find_method_blocks(source);
    std::vector<MethodBlock> top;
    for (const auto& b : blocks)
        if (b.depth == 0) top.push_back(b);
    std::sort(top.begin(), top.end(),
              [](const MethodBlock& a, const MethodBlock& b) { return a.body_begin < b.body_begin; });

    if (top.empty()) return chunk_source_lines(source, max_tokens);

    // A method chunk spans its header line through the closing brace; caller
    // text between methods is glued into one chunk so no text is lost.
    std::vector<std::size_t> line_start{0};
    for (std::size_t i = 0; i < source.size(); ++i)
        if (source[i] == '\n') line_start.push_back(i + 1);

    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::string glue;
    std::size_t cursor = 0;
    for (const auto& m : top) {
        std::size_t begin = m.start_line >= 1 &&
                                    static_cast<std::size_t>(m.start_line) <= line_start.size()
                                ? line_start[static_cast<std::size_t>(m.start_line - 1)]
                                : m.body_begin;
        begin = std::max(begin, cursor);
        std::size_t end = std::min<std::size_t>(m.body_end + 1, source.size());
        if (begin > cursor) glue += std::string(source.substr(cursor, begin - cursor));
        if (end > begin) spans.emplace_back(begin, end);
        cursor = std::max(cursor, end);
    }
    if (cursor < source.size()) glue += std::string(source.substr(cursor));

    std::vector<std::string> chunks;
    bool glue_nonblank = std::any_of(glue.begin(), glue.end(),
                                     [](unsigned char c) { return !std::isspace(c); });
    if (glue_nonblank) chunks.push_back(glue);
    for (auto [b, e] : spans) chunks.emplace_back(source.substr(b, e - b));

    // Oversize chunks (one huge method) re-split into line blocks.
    std::vector<std::string> out;
    for (auto& c : chunks) {
        if (approx_token_count(c) <= max_tokens) {
            out.push_back(std::move(c));
            continue;
        }
        for (auto& piece : chunk_source_lines(c, max_tokens)) out.push_back(std::move(piece));
    }
    return out;
}

std::vector<double> embed_file(std::string_view source, EmbeddingProvider& provider,
                               int max_tokens) {
    if (approx_token_count(source) <= max_tokens) return provider.embed(source);
    auto chunks = chunk_source(source, max_tokens);
    if (chunks.empty()) return provider.embed(source);
    std::vector<std::vector<double>> vecs = provider.embed_batch(chunks);
    std::vector<double> mean(static_cast<std::size_t>(provider.dim()), 0.0);
    for (const auto& v : vecs)
        for (std::size_t i = 0; i < mean.size() && i < v.size(); ++i) mean[i] += v[i];
    for (double& x : mean) x /= static_cast<double>(vecs.size());
    return mean;
}

std::optional<std::vector<double>> EmbeddingCache::get(const std::string& provider_id,
                                                       const std::string& content_hash) const {
    auto path = dir_ / sha256_hex(provider_id) / (content_hash + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        nlohmann::json j;
        in >> j;
        return j.get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // treat a corrupt entry as a miss
    }
}

void EmbeddingCache::put(const std::string& provider_id, const std::string& content_hash,
                         const std::vector<double>& vec) const {
    auto dir = dir_ / sha256_hex(provider_id);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / (content_hash + ".json"), std::ios::binary | std::ios::trunc);
    if (out) out << nlohmann::json(vec).dump();
}

EmbeddingSet embed_corpus(const Corpus& corpus, const std::vector<std::string>& sources,
                          EmbeddingProvider& provider, const EmbeddingProviderConfig& config,
                          const EmbeddingCache* cache) {
    EmbeddingSet set;
    set.provider_id = provider.id();
    set.dim = provider.dim();
    set.files.reserve(corpus.files.size());
    for (const auto& f : corpus.files) set.files.push_back(f.path);
    set.vectors.assign(corpus.files.size(), {});

    std::vector<std::string> errors(corpus.files.size());
    unsigned cap = config.max_in_flight > 0 ? static_cast<unsigned>(config.max_in_flight) : 1;
    parallel_for(corpus.files.size(), [&](std::size_t i) {
        const std::string& hash = corpus.files[i].content_hash;
        if (cache) {
            if (auto hit = cache->get(set.provider_id, hash)) {
                set.vectors[i] = std::move(*hit);
                return;
            }
        }
        try {
            set.vectors[i] = embed_file(sources.at(i), provider, config.max_tokens);
            if (cache) cache->put(set.provider_id, hash, set.vectors[i]);
        } catch (const EmbeddingError& e) {
            errors[i] = e.what();
            set.vectors[i].assign(static_cast<std::size_t>(set.dim), 0.0);
        }
    }, cap);

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) set.failed_files.push_back(set.files[i]);
    }
    return set;
}

}  // namespace loghint
