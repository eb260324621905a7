#include "loghint/server.hpp"

#include <atomic>
#include <mutex>

#include <httplib.h>
#include <json.hpp>

#include "loghint/partition.hpp"

namespace loghint {

using ordered_json = nlohmann::ordered_json;

struct PredictionService::Impl {
    Config config;
    httplib::Server server;
    std::shared_ptr<LoadedPipeline> pipeline;  // swapped in when ready
    std::atomic<bool> ready{false};
    std::atomic<int> port{0};
    std::mutex swap_mutex;

    std::shared_ptr<LoadedPipeline> current() {
        std::lock_guard<std::mutex> lock(swap_mutex);
        return pipeline;
    }

    static void send_error(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(ordered_json{{"error", ordered_json{{"status", status},
                                                            {"message", message}}}}
                            .dump(),
                        "application/json");
    }

    void wire() {
        server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            auto p = current();
            if (!ready.load() || !p) {
                send_error(res, 503, "index loading");
                return;
            }
            ordered_json j{{"status", "ok"}, {"corpus_hash", corpus_hash(p->corpus)}};
            res.set_content(j.dump(), "application/json");
        });

        server.Get(R"(/clusters/(\w+))", [this](const httplib::Request& req,
                                                httplib::Response& res) {
            auto p = current();
            if (!ready.load() || !p) {
                send_error(res, 503, "index loading");
                return;
            }
            auto mode = cluster_mode_from(req.matches[1].str());
            if (!mode || !p->partitions.count(*mode)) {
                send_error(res, 404, "unknown partition mode");
                return;
            }
            const Partition& part = p->partitions.at(*mode);
            std::vector<int> sizes(static_cast<std::size_t>(part.cluster_count), 0);
            int noise = 0;
            for (int l : part.assignment) {
                if (l == kNoise)
                    ++noise;
                else
                    ++sizes[static_cast<std::size_t>(l)];
            }
            ordered_json j;
            j["mode"] = to_string(part.mode);
            j["clusters"] = part.cluster_count;
            j["coverage"] = part.quality.coverage;
            if (part.quality.silhouette) j["silhouette"] = *part.quality.silhouette;
            if (part.quality.dbcv) j["dbcv"] = *part.quality.dbcv;
            if (part.quality.modularity) j["modularity"] = *part.quality.modularity;
            j["noise_files"] = noise;
            j["sizes"] = sizes;
            j["flags"] = part.flags;
            res.set_content(j.dump(), "application/json");
        });

        server.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
            auto p = current();
            if (!ready.load() || !p) {
                send_error(res, 503, "index loading");
                return;
            }
            PredictRequest pr;
            try {
                auto j = ordered_json::parse(req.body);
                if (!j.contains("file") || !j["file"].is_string()) {
                    send_error(res, 400, "missing 'file'");
                    return;
                }
                pr.file = j["file"].get<std::string>();
                if (j.contains("line")) pr.line = j["line"].get<int>();
                if (j.contains("message")) pr.message = j["message"].get<std::string>();
                if (j.contains("context")) pr.context = j["context"].get<std::string>();
                if (j.contains("mode")) pr.mode = j["mode"].get<std::string>();
                if (j.contains("k")) pr.k = j["k"].get<int>();
            } catch (const nlohmann::json::exception& e) {
                send_error(res, 400, std::string("malformed body: ") + e.what());
                return;
            }
            if (req.has_param("fallback") && req.get_param_value("fallback") == "false")
                pr.allow_fallback = false;

            try {
                PredictOutcome out = predict(*p, pr);
                auto payload = ordered_json::parse(out.payload_json);
                payload["latency_ms"] = out.latency_ms;
                res.set_content(payload.dump(), "application/json");
            } catch (const NotFoundError& e) {
                send_error(res, 404, e.what());
            } catch (const BadRequestError& e) {
                send_error(res, 400, e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            }
        });
    }
};

PredictionService::PredictionService(Config config) : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    impl_->wire();
}

PredictionService::~PredictionService() { stop(); }

void PredictionService::load(const std::filesystem::path& corpus_dir) {
    auto lp = load_pipeline(corpus_dir, impl_->config);
    {
        std::lock_guard<std::mutex> lock(impl_->swap_mutex);
        impl_->pipeline = std::move(lp);
    }
    impl_->ready.store(true);
}

bool PredictionService::ready() const { return impl_->ready.load(); }

bool PredictionService::listen(const std::string& host, int port) {
    if (port == 0) {
        int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) return false;
        impl_->port.store(bound);
        return impl_->server.listen_after_bind();
    }
    impl_->port.store(port);
    return impl_->server.listen(host, port);
}

int PredictionService::bound_port() const { return impl_->port.load(); }

void PredictionService::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace loghint
