#include "loghint/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "loghint/leiden.hpp"
#include "loghint/parallel.hpp"
#include "loghint/rng.hpp"

namespace loghint {

using ordered_json = nlohmann::ordered_json;

std::string to_string(EvalMode mode) {
    switch (mode) {
        case EvalMode::zero_shot: return "zero_shot";
        case EvalMode::global_random: return "global_random";
        case EvalMode::doc_component: return "doc_component";
        case EvalMode::ownership: return "ownership";
        case EvalMode::semantic: return "semantic";
        case EvalMode::multiplex: return "multiplex";
    }
    return "zero_shot";
}

std::optional<EvalMode> eval_mode_from(std::string_view name) {
    for (EvalMode m : all_eval_modes())
        if (to_string(m) == name) return m;
    return std::nullopt;
}

std::vector<EvalMode> all_eval_modes() {
    return {EvalMode::zero_shot,  EvalMode::global_random, EvalMode::doc_component,
            EvalMode::ownership,  EvalMode::semantic,      EvalMode::multiplex};
}

SplitResult split_corpus(const Corpus& corpus, double ratio, std::uint64_t seed) {
    SplitResult out;
    const std::size_t n = corpus.statements.size();
    if (n == 0) return out;

    std::map<int, std::vector<int>> by_level;
    for (std::size_t i = 0; i < n; ++i)
        by_level[corpus.statements[i].level].push_back(static_cast<int>(i));

    // Largest-remainder allocation keeps the overall split exact.
    struct Quota {
        int level;
        int floor_count;
        double remainder;
        std::size_t size;
    };
    std::vector<Quota> quotas;
    int floor_total = 0;
    int eligible_total = 0;
    for (const auto& [level, members] : by_level) {
        if (members.size() < 2) {
            out.warnings.push_back("level '" + corpus.scale.name_of(level) +
                                   "' has fewer than 2 statements; kept in the retrieval pool");
            continue;
        }
        double exact = ratio * static_cast<double>(members.size());
        int fl = static_cast<int>(std::floor(exact));
        quotas.push_back({level, fl, exact - fl, members.size()});
        floor_total += fl;
        eligible_total += static_cast<int>(members.size());
    }
    int want = static_cast<int>(std::lround(ratio * eligible_total));
    int leftover = want - floor_total;
    std::sort(quotas.begin(), quotas.end(), [](const Quota& a, const Quota& b) {
        if (a.remainder != b.remainder) return a.remainder > b.remainder;
        return a.level < b.level;
    });
    std::map<int, int> take;
    for (auto& q : quotas) {
        int extra = leftover > 0 ? 1 : 0;
        // a level cannot send more than it has
        int count = std::min<int>(q.floor_count + extra, static_cast<int>(q.size));
        if (extra && count == q.floor_count + 1) --leftover;
        take[q.level] = count;
    }

    Rng rng(Rng::mix(seed, 0x5471f7));
    for (auto& [level, members] : by_level) {
        auto it = take.find(level);
        if (it == take.end()) {
            for (int s : members) out.retrieval_pool.push_back(s);
            continue;
        }
        std::vector<int> shuffled = members;
        rng.shuffle(shuffled);
        for (std::size_t i = 0; i < shuffled.size(); ++i) {
            if (static_cast<int>(i) < it->second)
                out.retrieval_pool.push_back(shuffled[i]);
            else
                out.test_set.push_back(shuffled[i]);
        }
    }
    std::sort(out.retrieval_pool.begin(), out.retrieval_pool.end());
    std::sort(out.test_set.begin(), out.test_set.end());
    return out;
}

namespace {

struct Scored {
    std::vector<int> predicted;
    std::vector<int> truth;
    std::vector<std::vector<double>> scores;
    std::vector<bool> fallback;
    std::vector<bool> parse_failed;
    std::vector<double> item_aod;
};

double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

EvaluationReport run_experiment(const ExperimentPlan& plan, const Corpus& corpus,
                                const EvalArtifacts& artifacts, LlmClient& client,
                                const RunOptions& options) {
    EvaluationReport report;
    report.plan = plan;
    report.client_id = client.id();
    report.corpus_hash = corpus_hash(corpus);

    SplitResult split = split_corpus(corpus, plan.split_ratio, plan.seed);
    report.retrieval_size = static_cast<int>(split.retrieval_pool.size());
    report.test_size = static_cast<int>(split.test_set.size());
    report.warnings = split.warnings;

    static const EmbeddingSet kEmptyEmbeddings{};
    static const OwnershipMatrix kEmptyOwnership{};
    const EmbeddingSet& embeddings = artifacts.embeddings ? *artifacts.embeddings : kEmptyEmbeddings;
    const OwnershipMatrix& ownership = artifacts.ownership ? *artifacts.ownership : kEmptyOwnership;

    RetrievalIndex index = RetrievalIndex::build(corpus, artifacts.partitions, embeddings,
                                                 ownership, plan.seed, options.retrieval,
                                                 &split.retrieval_pool);

    // Majority level of the retrieval pool backs unparsable predictions.
    int majority_level = 0;
    {
        std::vector<int> counts(corpus.scale.size(), 0);
        for (int s : split.retrieval_pool)
            ++counts[static_cast<std::size_t>(corpus.statements[static_cast<std::size_t>(s)].level)];
        majority_level = static_cast<int>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
    }

    bool components_known = false;
    for (const auto& f : corpus.files)
        if (f.component != "unknown") components_known = true;

    std::optional<std::size_t> global_random_pos;

    for (EvalMode mode : plan.modes) {
        ModeReport mr;
        mr.mode = to_string(mode);

        bool needs_partition = mode == EvalMode::ownership || mode == EvalMode::semantic ||
                               mode == EvalMode::multiplex;
        ClusterMode cluster_mode = ClusterMode::semantic;
        if (mode == EvalMode::ownership) cluster_mode = ClusterMode::ownership;
        if (mode == EvalMode::multiplex) cluster_mode = ClusterMode::multiplex;

        if (mode == EvalMode::doc_component && !components_known) {
            mr.skipped = true;
            mr.skip_reason = "no documentation components recorded";
            report.modes.push_back(std::move(mr));
            continue;
        }
        if (needs_partition && !index.has_mode(cluster_mode)) {
            mr.skipped = true;
            mr.skip_reason = "partition for mode not built";
            report.modes.push_back(std::move(mr));
            continue;
        }

        const std::size_t n_test = split.test_set.size();
        Scored scored;
        scored.predicted.assign(n_test, 0);
        scored.truth.assign(n_test, 0);
        scored.scores.assign(n_test, {});
        scored.fallback.assign(n_test, false);
        scored.parse_failed.assign(n_test, false);
        scored.item_aod.assign(n_test, 0.0);
        std::vector<int> error_file(n_test, -1);  // file index when mispredicted

        parallel_for(n_test, [&](std::size_t t) {
            const auto& st = corpus.statements[static_cast<std::size_t>(split.test_set[t])];
            RetrievalQuery query{st.file, st.id};
            RetrievalResult retrieval;
            switch (mode) {
                case EvalMode::zero_shot:
                    retrieval.mode = "zero_shot";
                    break;
                case EvalMode::global_random:
                    retrieval = index.sample_uniform(query, plan.k_examples);
                    break;
                case EvalMode::doc_component:
                    retrieval = index.retrieve_component(query, plan.k_examples);
                    break;
                default:
                    retrieval = index.retrieve(query, cluster_mode, plan.k_examples);
                    break;
            }
            Prompt prompt = build_prompt(st.context, retrieval, corpus, corpus.scale);
            PredictionRecord rec = predict_level(prompt, client, corpus.scale, st.id,
                                                 majority_level, options.max_attempts);
            scored.predicted[t] = rec.predicted;
            scored.truth[t] = st.level;
            scored.scores[t] = rec.class_scores;
            scored.fallback[t] = retrieval.fallback_used;
            scored.parse_failed[t] = rec.parse_failed;
            int dist = std::abs(rec.predicted - st.level);
            int max_dist = corpus.scale.max_ordinal_distance(st.level);
            scored.item_aod[t] =
                max_dist > 0 ? 1.0 - static_cast<double>(dist) / max_dist : 1.0;
            if (rec.predicted != st.level) {
                auto fidx = corpus.file_index(st.file);
                error_file[t] = fidx.value_or(-1);
            }
        }, options.max_in_flight);

        mr.item_scores = scored.item_aod;
        mr.predictions = scored.predicted;
        mr.fallback_rate = n_test == 0 ? 0.0
                                       : static_cast<double>(std::count(scored.fallback.begin(),
                                                                        scored.fallback.end(), true)) /
                                             static_cast<double>(n_test);
        mr.parse_failure_rate =
            n_test == 0 ? 0.0
                        : static_cast<double>(std::count(scored.parse_failed.begin(),
                                                         scored.parse_failed.end(), true)) /
                              static_cast<double>(n_test);

        // Bootstrap rows re-score the deterministic per-statement records.
        std::vector<double> aucs, precisions, aods;
        for (int b = 0; b < plan.bootstraps; ++b) {
            Rng rng(Rng::mix(plan.seed, 0xb00757 + static_cast<std::uint64_t>(b)));
            std::vector<int> pred, truth;
            std::vector<std::vector<double>> scores;
            std::vector<bool> fb;
            pred.reserve(n_test);
            for (std::size_t i = 0; i < n_test; ++i) {
                std::size_t pick = rng.below(n_test);
                pred.push_back(scored.predicted[pick]);
                truth.push_back(scored.truth[pick]);
                scores.push_back(scored.scores[pick]);
                fb.push_back(scored.fallback[pick]);
            }
            BootstrapRow row;
            row.bootstrap = b;
            row.auc = auc_multiclass(scores, truth);
            row.precision = precision_exact(pred, truth);
            row.aod = average_ordinal_distance(pred, truth, corpus.scale);
            row.fallback_rate =
                n_test == 0 ? 0.0
                            : static_cast<double>(std::count(fb.begin(), fb.end(), true)) /
                                  static_cast<double>(fb.size());
            if (row.auc) aucs.push_back(*row.auc);
            precisions.push_back(row.precision);
            aods.push_back(row.aod);
            mr.rows.push_back(row);
        }
        if (!aucs.empty()) {
            mr.auc_mean = mean_of(aucs);
            mr.auc_std = std_of(aucs, *mr.auc_mean);
        }
        mr.precision_mean = mean_of(precisions);
        mr.precision_std = std_of(precisions, mr.precision_mean);
        mr.aod_mean = mean_of(aods);
        mr.aod_std = std_of(aods, mr.aod_mean);

        // Misprediction analysis for partition-backed modes.
        if (needs_partition && n_test > 0) {
            const Partition& part = artifacts.partitions.at(cluster_mode);
            int errors = 0, adjacent = 0, in_noise = 0;
            std::map<int, int> per_file;
            for (std::size_t t = 0; t < n_test; ++t) {
                if (scored.predicted[t] == scored.truth[t]) continue;
                ++errors;
                if (std::abs(scored.predicted[t] - scored.truth[t]) == 1) ++adjacent;
                int f = error_file[t];
                if (f >= 0) {
                    ++per_file[f];
                    if (part.assignment[static_cast<std::size_t>(f)] == kNoise) ++in_noise;
                }
            }
            if (errors > 0) {
                mr.adjacent_confusion = static_cast<double>(adjacent) / errors;
                mr.noise_error_fraction = static_cast<double>(in_noise) / errors;
                // Minimal prefix of files (by error count, descending) that
                // covers at least half of all errors, as a share of the files
                // holding test statements.
                std::vector<int> counts;
                for (const auto& [_, c] : per_file) counts.push_back(c);
                std::sort(counts.rbegin(), counts.rend());
                int covered = 0, used = 0;
                for (int c : counts) {
                    covered += c;
                    ++used;
                    if (2 * covered >= errors) break;
                }
                std::set<std::string> test_files;
                for (int s : split.test_set)
                    test_files.insert(corpus.statements[static_cast<std::size_t>(s)].file);
                mr.files_covering_half_errors =
                    test_files.empty() ? 0.0
                                       : static_cast<double>(used) /
                                             static_cast<double>(test_files.size());
            }
        }

        if (mode == EvalMode::global_random) global_random_pos = report.modes.size();
        report.modes.push_back(std::move(mr));
    }

    // Paired statistics vs global_random on the un-resampled test set.
    if (global_random_pos) {
        const auto& baseline = report.modes[*global_random_pos].item_scores;
        for (auto& mr : report.modes) {
            if (mr.skipped || mr.mode == "global_random") continue;
            if (mr.item_scores.size() != baseline.size() || baseline.empty()) continue;
            mr.vs_global_random = paired_comparison(mr.item_scores, baseline);
        }
    }

    // Clustering quality per built mode.
    for (const auto& [mode, part] : artifacts.partitions) {
        ClusterQualityReport cq;
        cq.mode = to_string(mode);
        cq.clusters = part.cluster_count;
        cq.coverage = part.quality.coverage;
        cq.silhouette = part.quality.silhouette;
        cq.dbi = part.quality.dbi;
        cq.dbcv = part.quality.dbcv;
        cq.modularity_value = part.quality.modularity;
        cq.flags = part.flags;

        const std::size_t n_files = corpus.files.size();
        bool have_sem = embeddings.vectors.size() == n_files && n_files > 0;
        bool have_own = ownership.rows.size() == n_files && n_files > 0;
        std::function<double(int, int)> sim;
        if (mode == ClusterMode::semantic && have_sem) {
            sim = [&](int a, int b) {
                return cosine_similarity(embeddings.vectors[static_cast<std::size_t>(a)],
                                         embeddings.vectors[static_cast<std::size_t>(b)]);
            };
        } else if (mode == ClusterMode::ownership && have_own) {
            sim = [&](int a, int b) {
                return cosine_similarity(ownership.rows[static_cast<std::size_t>(a)],
                                         ownership.rows[static_cast<std::size_t>(b)]);
            };
        } else if (mode == ClusterMode::multiplex && have_sem && have_own) {
            sim = [&](int a, int b) {
                double cs = cosine_similarity(embeddings.vectors[static_cast<std::size_t>(a)],
                                              embeddings.vectors[static_cast<std::size_t>(b)]);
                double co = cosine_similarity(ownership.rows[static_cast<std::size_t>(a)],
                                              ownership.rows[static_cast<std::size_t>(b)]);
                return combined_score(cs, co, options.retrieval.weights);
            };
        }
        if (sim && part.assignment.size() == n_files && n_files <= 3000)
            cq.cosine = intra_inter_cosine(sim, part.assignment);
        report.clustering.push_back(std::move(cq));
    }

    return report;
}

namespace {

ordered_json opt(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
    ordered_json j;
    ordered_json plan;
    ordered_json modes = ordered_json::array();
    for (EvalMode m : report.plan.modes) modes.push_back(to_string(m));
    plan["modes"] = modes;
    plan["k_examples"] = report.plan.k_examples;
    plan["split_ratio"] = report.plan.split_ratio;
    plan["bootstraps"] = report.plan.bootstraps;
    plan["seed"] = report.plan.seed;
    j["plan"] = plan;
    j["corpus_hash"] = report.corpus_hash;
    j["retrieval_size"] = report.retrieval_size;
    j["test_size"] = report.test_size;
    j["client"] = report.client_id;
    j["paired_metric"] = report.paired_metric;
    j["warnings"] = report.warnings;

    ordered_json jmodes = ordered_json::object();
    for (const auto& mr : report.modes) {
        ordered_json m;
        if (mr.skipped) {
            m["skipped"] = true;
            m["reason"] = mr.skip_reason;
            jmodes[mr.mode] = m;
            continue;
        }
        ordered_json rows = ordered_json::array();
        for (const auto& r : mr.rows) {
            rows.push_back(ordered_json{{"bootstrap", r.bootstrap},
                                        {"auc", opt(r.auc)},
                                        {"precision", r.precision},
                                        {"aod", r.aod},
                                        {"fallback_rate", r.fallback_rate}});
        }
        m["bootstrap_rows"] = rows;
        m["auc"] = ordered_json{{"mean", opt(mr.auc_mean)}, {"std", opt(mr.auc_std)}};
        m["precision"] = ordered_json{{"mean", mr.precision_mean}, {"std", mr.precision_std}};
        m["aod"] = ordered_json{{"mean", mr.aod_mean}, {"std", mr.aod_std}};
        m["fallback_rate"] = mr.fallback_rate;
        m["parse_failure_rate"] = mr.parse_failure_rate;
        m["scores_from_logprobs"] = mr.scores_from_logprobs;
        if (mr.vs_global_random) {
            double d = mr.vs_global_random->cohens_d;
            ordered_json stats;
            stats["p_value"] = mr.vs_global_random->p_value;
            if (std::isinf(d))
                stats["cohens_d"] = d > 0 ? "inf" : "-inf";
            else
                stats["cohens_d"] = d;
            stats["effect"] = mr.vs_global_random->effect_label;
            m["vs_global_random"] = stats;
        }
        if (mr.adjacent_confusion) {
            m["misprediction"] = ordered_json{
                {"adjacent_confusion", *mr.adjacent_confusion},
                {"noise_cluster_fraction", opt(mr.noise_error_fraction)},
                {"files_covering_half_errors", opt(mr.files_covering_half_errors)}};
        }
        jmodes[mr.mode] = m;
    }
    j["modes"] = jmodes;

    ordered_json jclusters = ordered_json::object();
    for (const auto& cq : report.clustering) {
        ordered_json c;
        c["clusters"] = cq.clusters;
        c["coverage"] = cq.coverage;
        c["silhouette"] = opt(cq.silhouette);
        c["dbi"] = opt(cq.dbi);
        c["dbcv"] = opt(cq.dbcv);
        c["modularity"] = opt(cq.modularity_value);
        c["intra_cosine"] = ordered_json{{"global_mean", opt(cq.cosine.intra_global)},
                                         {"per_cluster_mean", opt(cq.cosine.intra_per_cluster)}};
        c["inter_cosine"] = ordered_json{{"global_mean", opt(cq.cosine.inter_global)},
                                         {"per_pair_mean", opt(cq.cosine.inter_per_pair)}};
        c["flags"] = cq.flags;
        jclusters[cq.mode] = c;
    }
    j["clustering"] = jclusters;
    return j.dump(2) + "\n";
}

std::string report_to_markdown(const EvaluationReport& report) {
    std::string out;
    auto fmt = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *v);
        return std::string(buf);
    };
    out += "| Mode | AUC | Precision | AOD | Fallback | p vs random | d |\n";
    out += "|---|---|---|---|---|---|---|\n";
    for (const auto& mr : report.modes) {
        if (mr.skipped) {
            out += "| " + mr.mode + " | skipped: " + mr.skip_reason + " | | | | | |\n";
            continue;
        }
        char buf[256];
        std::string auc = mr.auc_mean
                              ? fmt(mr.auc_mean) + " ± " + fmt(mr.auc_std)
                              : std::string("-");
        std::snprintf(buf, sizeof buf, "| %s | %s | %.3f ± %.3f | %.3f ± %.3f | %.3f | %s | %s |\n",
                      mr.mode.c_str(), auc.c_str(), mr.precision_mean, mr.precision_std,
                      mr.aod_mean, mr.aod_std, mr.fallback_rate,
                      mr.vs_global_random ? fmt(mr.vs_global_random->p_value).c_str() : "-",
                      mr.vs_global_random ? fmt(mr.vs_global_random->cohens_d).c_str() : "-");
        out += buf;
    }
    out += "\n| Clustering | Clusters | Coverage | Silhouette | DBCV | Modularity |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& cq : report.clustering) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "| %s | %d | %.3f | %s | %s | %s |\n", cq.mode.c_str(),
                      cq.clusters, cq.coverage, fmt(cq.silhouette).c_str(), fmt(cq.dbcv).c_str(),
                      fmt(cq.modularity_value).c_str());
        out += buf;
    }
    return out;
}

StabilityResult temporal_stability(std::span<const CommitRecord> commits,
                                   const std::vector<std::string>& files,
                                   const StabilityOptions& options) {
    StabilityResult result;
    if (commits.empty() || files.empty()) {
        result.warnings.push_back("no commits or files; nothing to window");
        return result;
    }

    std::int64_t newest = commits[0].timestamp;
    std::int64_t oldest = commits[0].timestamp;
    for (const auto& c : commits) {
        newest = std::max(newest, c.timestamp);
        oldest = std::min(oldest, c.timestamp);
    }
    const double day = 86400.0;
    std::int64_t window_len = static_cast<std::int64_t>(
        options.window_months * options.days_per_month * day);
    if (window_len <= 0) return result;

    int max_windows = static_cast<int>((newest - oldest) / window_len) + 1;
    int windows = std::min(options.windows, max_windows);
    if (windows < options.windows)
        result.warnings.push_back("history shorter than requested; used " +
                                  std::to_string(windows) + " windows");

    std::unordered_map<std::string, std::size_t> file_index;
    for (std::size_t i = 0; i < files.size(); ++i) file_index[files[i]] = i;

    struct WindowPartition {
        std::vector<int> labels;
        std::vector<bool> active;  // file committed in the window
    };
    std::vector<WindowPartition> parts;

    for (int wi = windows - 1; wi >= 0; --wi) {  // oldest window first
        std::int64_t end = newest - static_cast<std::int64_t>(wi) * window_len;
        std::int64_t start = end - window_len;
        std::vector<CommitRecord> in_window;
        for (const auto& c : commits)
            if (c.timestamp > start && c.timestamp <= end) in_window.push_back(c);
        if (in_window.empty()) continue;  // skipped window

        OwnershipMatrix m = build_ownership_matrix(in_window, files, options.decay, end);
        WeightedGraph g = ownership_knn_graph(m, options.knn_k);
        TuneResult tuned = tune_resolution(g, options.resolutions, options.target_modularity,
                                           options.seed, options.min_community_size,
                                           ClusterMode::ownership);
        WindowPartition wp;
        wp.labels = tuned.partition.assignment;
        wp.active.assign(files.size(), false);
        for (const auto& c : in_window)
            for (const auto& path : c.touched_files) {
                auto it = file_index.find(path);
                if (it != file_index.end()) wp.active[it->second] = true;
            }
        parts.push_back(std::move(wp));
    }

    result.windows_used = static_cast<int>(parts.size());
    for (std::size_t i = 1; i < parts.size(); ++i) {
        std::vector<int> a, b;
        for (std::size_t f = 0; f < files.size(); ++f) {
            if (parts[i - 1].active[f] && parts[i].active[f]) {
                a.push_back(parts[i - 1].labels[f]);
                b.push_back(parts[i].labels[f]);
            }
        }
        if (a.empty()) continue;
        result.window_aris.push_back(adjusted_rand_index(a, b));
    }

    if (!result.window_aris.empty()) {
        std::vector<double> sorted = result.window_aris;
        std::sort(sorted.begin(), sorted.end());
        std::size_t mid = sorted.size() / 2;
        result.median_ari = sorted.size() % 2 == 1
                                ? sorted[mid]
                                : 0.5 * (sorted[mid - 1] + sorted[mid]);
    }
    return result;
}

}  // namespace loghint
