#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "loghint/config.hpp"
#include "loghint/pipeline.hpp"

namespace loghint {

/// Read-only JSON service over a loaded pipeline: POST /predict,
/// GET /clusters/{mode}, GET /health. Requests arriving before load()
/// completes get 503.
class PredictionService {
public:
    explicit PredictionService(Config config);
    ~PredictionService();

    PredictionService(const PredictionService&) = delete;
    PredictionService& operator=(const PredictionService&) = delete;

    /// Build the pipeline; the service flips to ready on success.
    void load(const std::filesystem::path& corpus_dir);

    bool ready() const;

    /// Bind and serve; port 0 picks a free port. Blocks until stop().
    bool listen(const std::string& host, int port);
    /// Port actually bound (valid after listen() started).
    int bound_port() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace loghint
