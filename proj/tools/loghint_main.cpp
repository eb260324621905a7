// loghint: context-aware retrieval of logging examples for log level
// prediction. Subcommands cover the full pipeline: ingest -> cluster ->
// index -> predict/evaluate/serve/stability.

#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "loghint/config.hpp"
#include "loghint/pipeline.hpp"
#include "loghint/server.hpp"

namespace {

using loghint::Config;

void print_error(const std::string& code, const std::string& message) {
    nlohmann::ordered_json j{{"error", nlohmann::ordered_json{{"code", code}, {"message", message}}}};
    std::cerr << j.dump() << std::endl;
}

Config make_config(const std::string& config_path) {
    if (config_path.empty()) {
        Config c;
        loghint::apply_env_overrides(c);
        return c;
    }
    return loghint::load_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"context-aware logging-example retrieval and log level prediction"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file")->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "scan a git repository into a corpus directory");
    std::string repo, out_dir;
    ingest->add_option("--repo", repo, "git working tree to scan")->required();
    ingest->add_option("--out", out_dir, "corpus output directory")->required();

    // cluster
    auto* cluster = app.add_subcommand("cluster", "build clustering artifacts");
    std::string corpus_dir, mode = "all";
    cluster->add_option("--corpus", corpus_dir, "corpus directory")->required();
    cluster->add_option("--mode", mode, "semantic|ownership|multiplex|all")
        ->capture_default_str();

    // index
    auto* index_cmd = app.add_subcommand("index", "bind the retrieval index to the artifacts");
    std::string index_corpus;
    index_cmd->add_option("--corpus", index_corpus, "corpus directory")->required();

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "predict the level for a statement");
    std::string p_corpus, p_file, p_mode = "multiplex", p_message, p_context;
    int p_line = -1, p_k = 5;
    predict_cmd->add_option("--corpus", p_corpus, "corpus directory")->required();
    predict_cmd->add_option("--file", p_file, "repo-relative file path")->required();
    predict_cmd->add_option("--line", p_line, "line of an existing statement");
    predict_cmd->add_option("--message", p_message, "log message for a new statement");
    predict_cmd->add_option("--context", p_context, "surrounding code for a new statement");
    predict_cmd->add_option("--mode", p_mode, "semantic|ownership|multiplex")
        ->capture_default_str();
    predict_cmd->add_option("--k", p_k, "examples to retrieve")->capture_default_str();

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "run the evaluation protocol");
    std::string e_corpus, e_plan;
    evaluate_cmd->add_option("--corpus", e_corpus, "corpus directory")->required();
    evaluate_cmd->add_option("--plan", e_plan, "plan.json")->required();

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "start the prediction service");
    std::string s_corpus;
    int s_port = 8080;
    serve_cmd->add_option("--corpus", s_corpus, "corpus directory")->required();
    serve_cmd->add_option("--port", s_port, "listen port")->capture_default_str();

    // stability
    auto* stability_cmd = app.add_subcommand("stability", "temporal ownership stability");
    std::string st_corpus;
    stability_cmd->add_option("--corpus", st_corpus, "corpus directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        Config config = make_config(config_path);

        if (*ingest) {
            loghint::Corpus corpus = loghint::ingest_repo(repo, out_dir, config);
            nlohmann::ordered_json j{{"files", corpus.files.size()},
                                     {"statements", corpus.statements.size()},
                                     {"commits", corpus.commits.size()},
                                     {"unreadable_files", corpus.report.unreadable_files}};
            std::cout << j.dump() << std::endl;
            for (const auto& w : corpus.report.warnings) std::cerr << "warning: " << w << "\n";
            return 0;
        }
        if (*cluster) {
            loghint::run_clustering(corpus_dir, mode, config);
            std::cout << "{\"clustered\": \"" << mode << "\"}" << std::endl;
            return 0;
        }
        if (*index_cmd) {
            loghint::write_index_manifest(index_corpus, config);
            std::cout << "{\"index\": \"ok\"}" << std::endl;
            return 0;
        }
        if (*predict_cmd) {
            auto pipeline = loghint::load_pipeline(p_corpus, config);
            loghint::PredictRequest request;
            request.file = p_file;
            if (p_line >= 0) request.line = p_line;
            request.message = p_message;
            request.context = p_context;
            request.mode = p_mode;
            request.k = p_k;
            loghint::PredictOutcome outcome = loghint::predict(*pipeline, request);
            auto payload = nlohmann::ordered_json::parse(outcome.payload_json);
            payload["latency_ms"] = outcome.latency_ms;
            std::cout << payload.dump() << std::endl;
            return 0;
        }
        if (*evaluate_cmd) {
            loghint::EvaluationReport report = loghint::evaluate(e_corpus, e_plan, config);
            std::cout << loghint::report_to_markdown(report);
            return 0;
        }
        if (*serve_cmd) {
            loghint::PredictionService service(config);
            std::thread loader([&] {
                try {
                    service.load(s_corpus);
                    std::cerr << "loghint: index ready\n";
                } catch (const std::exception& e) {
                    std::cerr << "loghint: load failed: " << e.what() << "\n";
                }
            });
            std::cerr << "loghint: listening on port " << s_port << "\n";
            bool ok = service.listen("0.0.0.0", s_port);
            loader.join();
            if (!ok) {
                print_error("listen_failed", "could not bind port " + std::to_string(s_port));
                return 1;
            }
            return 0;
        }
        if (*stability_cmd) {
            loghint::StabilityResult result = loghint::run_stability(st_corpus, config);
            std::cout << loghint::stability_to_json(result);
            return 0;
        }
    } catch (const loghint::BadRequestError& e) {
        print_error("bad_request", e.what());
        return 2;
    } catch (const loghint::NotFoundError& e) {
        print_error("not_found", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("error", e.what());
        return 1;
    }
    return 0;
}
