#include "loghint/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "loghint/extract.hpp"
#include "loghint/graph.hpp"
#include "loghint/hdbscan.hpp"
#include "loghint/leiden.hpp"
#include "loghint/sha256.hpp"

namespace loghint {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw PipelineError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw PipelineError("cannot write " + p.string());
    out << content;
}

Corpus load_corpus_or_hint(const std::filesystem::path& corpus_dir) {
    if (!std::filesystem::exists(corpus_dir / "manifest.json"))
        throw PipelineError("no corpus at " + corpus_dir.string() +
                            "; run `loghint ingest --repo <path> --out <dir>` first");
    return load_corpus(corpus_dir);
}

// Fallback documents when the corpus was stored without sources/: path
// tokens plus statement contexts, deterministic given the corpus.
std::vector<std::string> file_documents(const Corpus& corpus) {
    std::vector<std::string> docs(corpus.files.size());
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < corpus.files.size(); ++i) {
        index[corpus.files[i].path] = i;
        docs[i] = corpus.files[i].path + "\n";
    }
    for (const auto& st : corpus.statements) {
        auto it = index.find(st.file);
        if (it == index.end()) continue;
        docs[it->second] += st.context;
        docs[it->second] += "\n";
    }
    return docs;
}

}  // namespace

Corpus ingest_repo(const std::filesystem::path& repo, const std::filesystem::path& corpus_dir,
                   const Config& config) {
    Corpus corpus = scan_repo(repo, config.corpus_config());
    store_corpus(corpus, corpus_dir);

    // Keep the raw sources next to the corpus so the semantic stage can
    // embed whole files later without the original checkout.
    std::filesystem::create_directories(corpus_dir / "sources");
    for (const auto& f : corpus.files) {
        std::error_code ec;
        auto dst = corpus_dir / "sources" / f.path;
        std::filesystem::create_directories(dst.parent_path(), ec);
        std::filesystem::copy_file(repo / f.path, dst,
                                   std::filesystem::copy_options::overwrite_existing, ec);
    }
    return corpus;
}

void store_embeddings(const EmbeddingSet& set, const std::filesystem::path& corpus_dir) {
    ordered_json j;
    j["provider_id"] = set.provider_id;
    j["corpus_hash"] = set.corpus_hash;
    j["dim"] = set.dim;
    j["files"] = set.files;
    j["vectors"] = set.vectors;
    j["reduced_dim"] = set.reduced_dim;
    j["reduced"] = set.reduced;
    j["failed_files"] = set.failed_files;
    write_file(corpus_dir / "embeddings.json", j.dump() + "\n");
}

EmbeddingSet load_embeddings(const std::filesystem::path& corpus_dir) {
    auto path = corpus_dir / "embeddings.json";
    if (!std::filesystem::exists(path))
        throw PipelineError("no embeddings at " + path.string() +
                            "; run `loghint cluster --corpus <dir> --mode semantic` first");
    ordered_json j = ordered_json::parse(read_file(path));
    EmbeddingSet set;
    set.provider_id = j.at("provider_id").get<std::string>();
    set.corpus_hash = j.at("corpus_hash").get<std::string>();
    set.dim = j.at("dim").get<int>();
    set.files = j.at("files").get<std::vector<std::string>>();
    set.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
    set.reduced_dim = j.at("reduced_dim").get<int>();
    set.reduced = j.at("reduced").get<std::vector<std::vector<double>>>();
    set.failed_files = j.at("failed_files").get<std::vector<std::string>>();
    return set;
}

namespace {

EmbeddingSet ensure_embeddings(const std::filesystem::path& corpus_dir, const Corpus& corpus,
                               const std::string& hash, const Config& config) {
    if (std::filesystem::exists(corpus_dir / "embeddings.json")) {
        EmbeddingSet set = load_embeddings(corpus_dir);
        if (set.corpus_hash == hash) return set;
    }
    auto provider = make_provider(config.embedding);
    EmbeddingCache cache(corpus_dir / "cache" / "embeddings");

    std::vector<std::string> sources(corpus.files.size());
    bool have_sources = std::filesystem::is_directory(corpus_dir / "sources");
    if (have_sources) {
        for (std::size_t i = 0; i < corpus.files.size(); ++i) {
            std::ifstream in(corpus_dir / "sources" / corpus.files[i].path, std::ios::binary);
            if (in) {
                std::ostringstream ss;
                ss << in.rdbuf();
                sources[i] = ss.str();
            }
        }
    } else {
        sources = file_documents(corpus);
    }

    EmbeddingSet set = embed_corpus(corpus, sources, *provider, config.embedding, &cache);
    set.corpus_hash = hash;
    if (static_cast<int>(set.vectors.size()) > config.reduce_dim && set.dim > config.reduce_dim) {
        PcaReducer pca;
        reduce_embeddings(set, config.reduce_dim, &pca);
    }
    store_embeddings(set, corpus_dir);
    return set;
}

OwnershipMatrix build_ownership(const Corpus& corpus, const Config& config) {
    std::vector<std::string> files;
    files.reserve(corpus.files.size());
    for (const auto& f : corpus.files) files.push_back(f.path);
    std::int64_t reference = 0;
    for (const auto& c : corpus.commits) reference = std::max(reference, c.timestamp);
    return build_ownership_matrix(corpus.commits, files, DecayConfig{config.half_life_days},
                                  reference);
}

}  // namespace

void run_clustering(const std::filesystem::path& corpus_dir, const std::string& mode,
                    const Config& config) {
    Corpus corpus = load_corpus_or_hint(corpus_dir);
    std::string hash = corpus_hash(corpus);

    bool want_semantic = mode == "semantic" || mode == "all";
    bool want_ownership = mode == "ownership" || mode == "all";
    bool want_multiplex = mode == "multiplex" || mode == "all";
    if (!want_semantic && !want_ownership && !want_multiplex)
        throw PipelineError("unknown cluster mode '" + mode +
                            "' (expected semantic, ownership, multiplex or all)");

    EmbeddingSet embeddings;
    if (want_semantic || want_multiplex)
        embeddings = ensure_embeddings(corpus_dir, corpus, hash, config);
    OwnershipMatrix ownership;
    if (want_ownership || want_multiplex) {
        ownership = build_ownership(corpus, config);
        write_ownership_jsonl(ownership, corpus_dir / "ownership.jsonl");
    }

    std::vector<std::string> paths;
    for (const auto& f : corpus.files) paths.push_back(f.path);

    if (want_semantic) {
        const auto& points = embeddings.reduced.empty() ? embeddings.vectors : embeddings.reduced;
        GridSearchResult grid = hdbscan_grid_search(points, static_cast<int>(points.size()));
        Partition p;
        p.mode = ClusterMode::semantic;
        p.seed = config.seed;
        p.assignment = grid.clustering.labels;
        p.cluster_count = grid.clustering.cluster_count;
        p.items = paths;
        p.num_params["min_cluster_size"] = grid.best.min_cluster_size;
        p.num_params["min_samples"] = grid.best.min_samples;
        p.str_params["corpus_hash"] = hash;
        p.str_params["provider_id"] = embeddings.provider_id;
        if (grid.degenerate_warning) p.flags.push_back("degenerate");
        p.quality.coverage = coverage_of(p.assignment);
        p.quality.silhouette = silhouette_score(points, p.assignment);
        p.quality.dbi = davies_bouldin_index(points, p.assignment);
        p.quality.dbcv = dbcv_score(points, p.assignment);
        write_partition_json(p, corpus_dir / "partition.semantic.json");
    }

    if (want_ownership) {
        WeightedGraph g = ownership_knn_graph(ownership, config.knn_k);
        TuneResult tuned = tune_resolution(g, config.resolutions, config.target_modularity,
                                           config.seed, config.min_community_size,
                                           ClusterMode::ownership);
        tuned.partition.items = paths;
        tuned.partition.str_params["corpus_hash"] = hash;
        write_partition_json(tuned.partition, corpus_dir / "partition.ownership.json");
    }

    if (want_multiplex) {
        MultiplexGraph mg;
        mg.node_count = static_cast<int>(corpus.files.size());
        mg.layers.push_back(build_layer(embeddings.vectors, config.knn_k));
        WeightedGraph own_layer = ownership_knn_graph(ownership, config.knn_k);
        rescale_weights(own_layer);
        mg.layers.push_back(own_layer);
        Partition p = multiplex_leiden(mg, {1.0, 1.0}, 1.0, config.seed,
                                       config.min_community_size);
        p.items = paths;
        p.str_params["corpus_hash"] = hash;
        write_partition_json(p, corpus_dir / "partition.multiplex.json");
    }
}

void write_index_manifest(const std::filesystem::path& corpus_dir, const Config& config) {
    Corpus corpus = load_corpus_or_hint(corpus_dir);
    std::string hash = corpus_hash(corpus);
    ordered_json j;
    j["corpus_hash"] = hash;
    j["seed"] = config.seed;
    j["weights"] = ordered_json{{"semantic", config.weights.semantic},
                                {"ownership", config.weights.ownership}};
    ordered_json parts = ordered_json::object();
    for (const char* mode : {"semantic", "ownership", "multiplex"}) {
        auto path = corpus_dir / ("partition." + std::string(mode) + ".json");
        if (std::filesystem::exists(path)) parts[mode] = sha256_hex(read_file(path));
    }
    if (parts.empty())
        throw PipelineError("no partitions found; run `loghint cluster --corpus <dir> --mode all` first");
    j["partitions"] = parts;
    std::filesystem::create_directories(corpus_dir / "index");
    write_file(corpus_dir / "index" / "manifest.json", j.dump(2) + "\n");
}

std::unique_ptr<LoadedPipeline> load_pipeline(const std::filesystem::path& corpus_dir,
                                              const Config& config) {
    auto lp = std::make_unique<LoadedPipeline>();
    lp->config = config;
    lp->corpus = load_corpus_or_hint(corpus_dir);
    std::string hash = corpus_hash(lp->corpus);

    for (auto [mode, name] : {std::pair{ClusterMode::semantic, "semantic"},
                              std::pair{ClusterMode::ownership, "ownership"},
                              std::pair{ClusterMode::multiplex, "multiplex"}}) {
        auto path = corpus_dir / ("partition." + std::string(name) + ".json");
        if (std::filesystem::exists(path)) lp->partitions[mode] = read_partition_json(path);
    }
    if (lp->partitions.empty())
        throw PipelineError("no partitions at " + corpus_dir.string() +
                            "; run `loghint cluster --corpus <dir> --mode all` first");

    if (std::filesystem::exists(corpus_dir / "embeddings.json"))
        lp->embeddings = load_embeddings(corpus_dir);
    lp->ownership = build_ownership(lp->corpus, config);

    auto manifest_path = corpus_dir / "index" / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        ordered_json m = ordered_json::parse(read_file(manifest_path));
        if (m.at("corpus_hash").get<std::string>() != hash)
            throw PipelineError("index manifest does not match the corpus; re-run `loghint index`");
    }

    lp->index = std::make_unique<RetrievalIndex>(
        RetrievalIndex::build(lp->corpus, lp->partitions, lp->embeddings, lp->ownership,
                              config.seed, config.retrieval_options()));
    return lp;
}

namespace {

ordered_json payload_json(const PredictionRecord& record, const Corpus& corpus,
                          const RetrievalResult& retrieval) {
    ordered_json j;
    j["level"] = corpus.scale.name_of(record.predicted);
    ordered_json scores = ordered_json::object();
    for (std::size_t i = 0; i < corpus.scale.names.size(); ++i)
        scores[corpus.scale.names[i]] = record.class_scores[i];
    j["class_scores"] = scores;
    ordered_json examples = ordered_json::array();
    for (const auto& e : retrieval.examples) {
        const auto& st = corpus.statements[static_cast<std::size_t>(e.statement)];
        examples.push_back(ordered_json{{"id", st.id},
                                        {"file", st.file},
                                        {"line", st.line},
                                        {"level", st.level_name},
                                        {"score", e.score}});
    }
    j["examples"] = examples;
    j["fallback"] = retrieval.fallback_used;
    j["mode"] = retrieval.mode;
    if (retrieval.cluster_id == kNoise)
        j["cluster"] = "NOISE";
    else
        j["cluster"] = retrieval.cluster_id;
    j["parse_failed"] = record.parse_failed;
    return j;
}

}  // namespace

PredictOutcome predict(LoadedPipeline& pipeline, const PredictRequest& request) {
    auto start = std::chrono::steady_clock::now();
    auto mode = cluster_mode_from(request.mode);
    if (!mode) throw BadRequestError("unknown mode '" + request.mode + "'");
    if (!pipeline.partitions.count(*mode))
        throw PipelineError("partition for mode '" + request.mode +
                            "' not built; run `loghint cluster --corpus <dir> --mode " +
                            request.mode + "` first");

    const Corpus& corpus = pipeline.corpus;
    std::string target_context;
    std::string target_id;
    bool known_file = corpus.file_index(request.file).has_value();

    if (request.line) {
        const LoggingStatement* st = corpus.find_statement(request.file, *request.line);
        if (!st) {
            if (!request.allow_fallback)
                throw NotFoundError("no statement at " + request.file + ":" +
                                    std::to_string(*request.line));
            target_id = request.file + ":" + std::to_string(*request.line);
            target_context = request.context;
        } else {
            target_id = st->id;
            target_context = st->context;
        }
    } else {
        if (request.message.empty() && request.context.empty())
            throw BadRequestError("need either a line or a message/context");
        target_id = request.file + ":+new";
        target_context = request.context;
        if (!target_context.empty() && target_context.back() != '\n') target_context += "\n";
        target_context += "log." + std::string(kLevelMask) + "(\"" + request.message + "\");";
    }
    if (!known_file && !request.allow_fallback)
        throw NotFoundError("unknown file " + request.file);

    RetrievalQuery query{request.file, target_id};
    RetrievalResult retrieval = pipeline.index->retrieve(query, *mode, request.k);
    Prompt prompt = build_prompt(target_context, retrieval, corpus, corpus.scale);

    // Majority level over the whole pool backs unparsable responses.
    std::vector<int> counts(corpus.scale.size(), 0);
    for (const auto& st : corpus.statements) ++counts[static_cast<std::size_t>(st.level)];
    int majority = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                    counts.begin());

    auto client = make_client(pipeline.config.llm);
    PredictOutcome out;
    out.record = predict_level(prompt, *client, corpus.scale, target_id, majority,
                               pipeline.config.llm.max_retries);
    out.record.retrieval = retrieval;
    out.payload_json = payload_json(out.record, corpus, retrieval).dump();
    out.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return out;
}

ExperimentPlan load_plan(const std::filesystem::path& plan_file) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_file(plan_file));
    } catch (const nlohmann::json::exception& e) {
        throw PipelineError(std::string("plan is not valid JSON: ") + e.what());
    }
    ExperimentPlan plan;
    for (const auto& [key, _] : j.items()) {
        if (key != "modes" && key != "k_examples" && key != "split_ratio" &&
            key != "bootstraps" && key != "seed")
            throw PipelineError("unknown plan key '" + key + "'");
    }
    if (j.contains("modes")) {
        plan.modes.clear();
        for (const auto& m : j["modes"]) {
            auto mode = eval_mode_from(m.get<std::string>());
            if (!mode) throw PipelineError("unknown eval mode '" + m.get<std::string>() + "'");
            plan.modes.push_back(*mode);
        }
    }
    if (j.contains("k_examples")) plan.k_examples = j["k_examples"].get<int>();
    if (j.contains("split_ratio")) plan.split_ratio = j["split_ratio"].get<double>();
    if (j.contains("bootstraps")) plan.bootstraps = j["bootstraps"].get<int>();
    if (j.contains("seed")) plan.seed = j["seed"].get<std::uint64_t>();
    if (plan.split_ratio <= 0.0 || plan.split_ratio >= 1.0)
        throw PipelineError("split_ratio must be in (0,1)");
    return plan;
}

EvaluationReport evaluate(const std::filesystem::path& corpus_dir,
                          const std::filesystem::path& plan_file, const Config& config) {
    ExperimentPlan plan = load_plan(plan_file);
    auto pipeline = load_pipeline(corpus_dir, config);

    EvalArtifacts artifacts;
    artifacts.partitions = pipeline->partitions;
    artifacts.embeddings = &pipeline->embeddings;
    artifacts.ownership = &pipeline->ownership;

    std::map<std::string, std::string> truth;
    if (config.llm.kind == LlmClientConfig::Kind::mock_oracle) {
        for (const auto& st : pipeline->corpus.statements) truth[st.id] = st.level_name;
    }
    auto client = make_client(config.llm, std::move(truth));

    RunOptions options;
    options.retrieval = config.retrieval_options();
    options.max_attempts = config.llm.max_retries;

    EvaluationReport report = run_experiment(plan, pipeline->corpus, artifacts, *client, options);
    write_file(corpus_dir / "report.json", report_to_json(report));
    write_file(corpus_dir / "report.md", report_to_markdown(report));
    return report;
}

StabilityResult run_stability(const std::filesystem::path& corpus_dir, const Config& config) {
    Corpus corpus = load_corpus_or_hint(corpus_dir);
    std::vector<std::string> files;
    for (const auto& f : corpus.files) files.push_back(f.path);
    StabilityOptions options;
    options.decay = DecayConfig{config.half_life_days};
    options.knn_k = config.knn_k;
    options.resolutions = config.resolutions;
    options.target_modularity = config.target_modularity;
    options.min_community_size = config.min_community_size;
    options.seed = config.seed;
    return temporal_stability(corpus.commits, files, options);
}

std::string stability_to_json(const StabilityResult& result) {
    ordered_json j;
    j["median_ari"] = result.median_ari;
    j["windows_used"] = result.windows_used;
    j["window_aris"] = result.window_aris;
    j["warnings"] = result.warnings;
    return j.dump(2) + "\n";
}

}  // namespace loghint
