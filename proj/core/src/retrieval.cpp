#include "loghint/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "loghint/rng.hpp"

namespace loghint {

namespace {

constexpr int kOwnershipSignatureDim = 64;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<double> normalized(const std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    if (n <= 0.0) return std::vector<double>(v.size(), 0.0);
    n = std::sqrt(n);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

OwnershipRow normalized_row(const OwnershipRow& row) {
    double n = 0.0;
    for (const auto& [_, w] : row) n += w * w;
    if (n <= 0.0) return {};
    n = std::sqrt(n);
    OwnershipRow out;
    out.reserve(row.size());
    for (const auto& [a, w] : row) out.emplace_back(a, w / n);
    return out;
}

double sparse_dot(const OwnershipRow& a, const OwnershipRow& b) {
    double dot = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first == b[j].first) {
            dot += a[i].second * b[j].second;
            ++i;
            ++j;
        } else if (a[i].first < b[j].first) {
            ++i;
        } else {
            ++j;
        }
    }
    return dot;
}

double dense_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

/// Sign-hash the sparse ownership row into a small dense signature whose dot
/// product approximates the ownership cosine; only the ANN probe uses it.
std::vector<double> ownership_signature(const OwnershipRow& unit_row) {
    std::vector<double> sig(kOwnershipSignatureDim, 0.0);
    for (const auto& [author, w] : unit_row) {
        std::uint64_t h = Rng::mix(0x515a11, static_cast<std::uint64_t>(author));
        double sign = (h & 1) ? 1.0 : -1.0;
        sig[(h >> 1) % kOwnershipSignatureDim] += sign * w;
    }
    return normalized(sig);
}

}  // namespace

double combined_score(double cos_sem, double cos_own, const ScoreWeights& weights) {
    return weights.semantic * cos_sem + weights.ownership * cos_own;
}

RetrievalIndex RetrievalIndex::build(const Corpus& corpus,
                                     const std::map<ClusterMode, Partition>& partitions,
                                     const EmbeddingSet& embeddings,
                                     const OwnershipMatrix& ownership, std::uint64_t seed,
                                     RetrievalOptions options,
                                     const std::vector<int>* candidate_statements) {
    // Manifest binding: artifacts that carry a corpus hash must agree.
    std::vector<std::string> bound;
    if (!embeddings.corpus_hash.empty()) bound.push_back(embeddings.corpus_hash);
    for (const auto& [mode, p] : partitions) {
        auto it = p.str_params.find("corpus_hash");
        if (it != p.str_params.end() && !it->second.empty()) bound.push_back(it->second);
    }
    if (!bound.empty()) {
        std::string expect = corpus_hash(corpus);
        for (const auto& h : bound)
            if (h != expect)
                throw RetrievalError("artifact manifest hash does not match the corpus");
    }

    RetrievalIndex idx;
    idx.corpus_ = &corpus;
    idx.seed_ = seed;
    idx.options_ = options;

    const std::size_t n_files = corpus.files.size();
    for (std::size_t i = 0; i < n_files; ++i)
        idx.file_index_[corpus.files[i].path] = static_cast<int>(i);

    idx.sem_norm_.assign(n_files, {});
    for (std::size_t i = 0; i < n_files && i < embeddings.vectors.size(); ++i)
        idx.sem_norm_[i] = normalized(embeddings.vectors[i]);
    idx.own_norm_.assign(n_files, {});
    idx.own_sig_.assign(n_files, std::vector<double>(kOwnershipSignatureDim, 0.0));
    for (std::size_t i = 0; i < n_files && i < ownership.rows.size(); ++i) {
        idx.own_norm_[i] = normalized_row(ownership.rows[i]);
        idx.own_sig_[i] = ownership_signature(idx.own_norm_[i]);
    }

    // Candidate statements per file, corpus order.
    idx.file_statements_.assign(n_files, {});
    auto admit = [&](int s) {
        const auto& st = corpus.statements[static_cast<std::size_t>(s)];
        auto it = idx.file_index_.find(st.file);
        if (it == idx.file_index_.end()) return;
        idx.file_statements_[static_cast<std::size_t>(it->second)].push_back(s);
        idx.pool_.push_back(s);
    };
    if (candidate_statements) {
        std::vector<int> sorted(*candidate_statements);
        std::sort(sorted.begin(), sorted.end());
        for (int s : sorted) admit(s);
    } else {
        for (std::size_t s = 0; s < corpus.statements.size(); ++s) admit(static_cast<int>(s));
    }

    for (const auto& [path, fidx] : idx.file_index_) {
        (void)path;
        const auto& f = corpus.files[static_cast<std::size_t>(fidx)];
        if (f.component != "unknown") idx.component_files_[f.component].push_back(fidx);
    }
    for (auto& [_, files] : idx.component_files_) std::sort(files.begin(), files.end());

    for (const auto& [mode, partition] : partitions) {
        if (partition.assignment.size() != n_files)
            throw RetrievalError("partition does not cover the corpus files");
        idx.assignments_[mode] = partition.assignment;
        int clusters = partition.cluster_count;
        std::vector<Bucket> buckets(static_cast<std::size_t>(std::max(0, clusters)));
        for (std::size_t f = 0; f < n_files; ++f) {
            int c = partition.assignment[f];
            if (c == kNoise) continue;
            if (idx.file_statements_[f].empty()) continue;
            buckets[static_cast<std::size_t>(c)].files.push_back(static_cast<int>(f));
            buckets[static_cast<std::size_t>(c)].statement_count +=
                static_cast<int>(idx.file_statements_[f].size());
        }
        for (std::size_t c = 0; c < buckets.size(); ++c) {
            auto& b = buckets[c];
            if (b.files.size() >= 8) {  // probing tiny clusters buys nothing
                std::vector<std::vector<double>> vecs;
                vecs.reserve(b.files.size());
                for (int f : b.files) vecs.push_back(idx.ann_vector(mode, f));
                b.ann.build(vecs, b.files, Rng::mix(seed, 0xa55 + c), options.kmeans_iters);
            }
        }
        idx.buckets_[mode] = std::move(buckets);
    }
    return idx;
}

std::vector<double> RetrievalIndex::ann_vector(ClusterMode mode, int file) const {
    const auto& sem = sem_norm_[static_cast<std::size_t>(file)];
    const auto& sig = own_sig_[static_cast<std::size_t>(file)];
    switch (mode) {
        case ClusterMode::semantic:
            return sem;
        case ClusterMode::ownership:
            return sig;
        case ClusterMode::multiplex: {
            // Scaled concatenation: dot == w_sem*cos_sem + w_own*cos_own(sig).
            std::vector<double> v;
            v.reserve(sem.size() + sig.size());
            for (double x : sem) v.push_back(options_.weights.semantic * x);
            for (double x : sig) v.push_back(options_.weights.ownership * x);
            return v;
        }
    }
    return sem;
}

double RetrievalIndex::score(ClusterMode mode, int target_file, int candidate_file) const {
    auto cos_sem = [&] {
        return dense_dot(sem_norm_[static_cast<std::size_t>(target_file)],
                         sem_norm_[static_cast<std::size_t>(candidate_file)]);
    };
    auto cos_own = [&] {
        return sparse_dot(own_norm_[static_cast<std::size_t>(target_file)],
                          own_norm_[static_cast<std::size_t>(candidate_file)]);
    };
    switch (mode) {
        case ClusterMode::semantic:
            return cos_sem();
        case ClusterMode::ownership:
            return cos_own();
        case ClusterMode::multiplex:
            return combined_score(cos_sem(), cos_own(), options_.weights);
    }
    return 0.0;
}

int RetrievalIndex::cluster_of(ClusterMode mode, const std::string& file) const {
    auto ait = assignments_.find(mode);
    if (ait == assignments_.end()) return kNoise;
    auto fit = file_index_.find(file);
    if (fit == file_index_.end()) return kNoise;
    return ait->second[static_cast<std::size_t>(fit->second)];
}

int RetrievalIndex::candidate_count(ClusterMode mode, int cluster,
                                    const std::string& exclude_file) const {
    auto bit = buckets_.find(mode);
    if (bit == buckets_.end() || cluster < 0 ||
        cluster >= static_cast<int>(bit->second.size()))
        return 0;
    const Bucket& b = bit->second[static_cast<std::size_t>(cluster)];
    int count = b.statement_count;
    auto fit = file_index_.find(exclude_file);
    if (fit != file_index_.end())
        count -= static_cast<int>(file_statements_[static_cast<std::size_t>(fit->second)].size());
    return count;
}

void RetrievalIndex::sample_into(RetrievalResult& out, const std::vector<int>& statements,
                                 const std::string& exclude_file, int k,
                                 std::uint64_t stream) const {
    std::vector<int> eligible;
    eligible.reserve(statements.size());
    for (int s : statements) {
        if (corpus_->statements[static_cast<std::size_t>(s)].file != exclude_file)
            eligible.push_back(s);
    }
    Rng rng(Rng::mix(seed_, stream));
    std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(k), eligible.size());
    auto picks = rng.sample_without_replacement(eligible.size(), want);
    for (std::size_t p : picks) out.examples.push_back({eligible[p], 0.0});
}

RetrievalResult RetrievalIndex::fallback(const RetrievalQuery& query, int k,
                                         const std::string& mode_name, bool flag_fallback) const {
    RetrievalResult out;
    out.mode = mode_name;
    out.fallback_used = flag_fallback;
    out.cluster_id = kNoise;
    sample_into(out, pool_, query.file, k,
                Rng::hash_string(query.statement_id) ^ Rng::hash_string(mode_name));
    return out;
}

RetrievalResult RetrievalIndex::retrieve(const RetrievalQuery& query, ClusterMode mode,
                                         int k) const {
    return retrieve(query, mode, k, options_.use_ann);
}

RetrievalResult RetrievalIndex::retrieve(const RetrievalQuery& query, ClusterMode mode, int k,
                                         bool use_ann) const {
    auto start = Clock::now();
    const std::string mode_name = to_string(mode);

    auto fit = file_index_.find(query.file);
    auto bit = buckets_.find(mode);
    if (fit == file_index_.end() || bit == buckets_.end()) {
        RetrievalResult out = fallback(query, k, mode_name, true);
        out.latency_ms = elapsed_ms(start);
        return out;
    }
    int target_file = fit->second;
    int cluster = assignments_.at(mode)[static_cast<std::size_t>(target_file)];
    if (cluster == kNoise || cluster >= static_cast<int>(bit->second.size())) {
        RetrievalResult out = fallback(query, k, mode_name, true);
        out.latency_ms = elapsed_ms(start);
        return out;
    }

    const Bucket& bucket = bit->second[static_cast<std::size_t>(cluster)];
    int available = bucket.statement_count -
                    static_cast<int>(file_statements_[static_cast<std::size_t>(target_file)].size());
    if (available < k && !options_.partial_fill) {
        RetrievalResult out = fallback(query, k, mode_name, true);
        out.cluster_id = cluster;
        out.latency_ms = elapsed_ms(start);
        return out;
    }

    // Candidate files, probed or exhaustive.
    std::vector<int> files;
    if (use_ann && !bucket.ann.empty()) {
        int nprobe = std::max(
            1, static_cast<int>(std::lround(options_.nprobe_fraction * bucket.ann.nlist())));
        files = bucket.ann.probe(ann_vector(mode, target_file), nprobe);
        int probed_statements = 0;
        for (int f : files)
            if (f != target_file)
                probed_statements += static_cast<int>(file_statements_[static_cast<std::size_t>(f)].size());
        if (probed_statements < k) files = bucket.files;  // recall floor
    } else {
        files = bucket.files;
    }

    std::vector<std::pair<double, int>> ranked;  // (score, statement)
    ranked.reserve(static_cast<std::size_t>(bucket.statement_count));
    for (int f : files) {
        if (f == target_file) continue;
        double s = score(mode, target_file, f);
        for (int stmt : file_statements_[static_cast<std::size_t>(f)]) ranked.emplace_back(s, stmt);
    }
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                      ranked.end(), [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;  // statement id order
                      });

    RetrievalResult out;
    out.mode = mode_name;
    out.cluster_id = cluster;
    for (std::size_t i = 0; i < take; ++i)
        out.examples.push_back({ranked[i].second, ranked[i].first});
    if (static_cast<int>(out.examples.size()) < k) {
        // partial_fill: pad with uniform project-wide picks, skipping the
        // ranked examples already taken.
        out.fallback_used = true;
        std::vector<bool> taken(corpus_->statements.size(), false);
        for (const auto& e : out.examples) taken[static_cast<std::size_t>(e.statement)] = true;
        std::vector<int> eligible;
        for (int s : pool_) {
            if (taken[static_cast<std::size_t>(s)]) continue;
            if (corpus_->statements[static_cast<std::size_t>(s)].file == query.file) continue;
            eligible.push_back(s);
        }
        Rng rng(Rng::mix(seed_, Rng::hash_string(query.statement_id) ^
                                    Rng::hash_string(mode_name)));
        std::size_t want = std::min<std::size_t>(
            static_cast<std::size_t>(k) - out.examples.size(), eligible.size());
        for (std::size_t p : rng.sample_without_replacement(eligible.size(), want))
            out.examples.push_back({eligible[p], 0.0});
    }
    out.latency_ms = elapsed_ms(start);
    return out;
}

RetrievalResult RetrievalIndex::sample_uniform(const RetrievalQuery& query, int k) const {
    auto start = Clock::now();
    RetrievalResult out = fallback(query, k, "global_random", false);
    out.latency_ms = elapsed_ms(start);
    return out;
}

RetrievalResult RetrievalIndex::retrieve_component(const RetrievalQuery& query, int k) const {
    auto start = Clock::now();
    auto fit = file_index_.find(query.file);
    std::string component = "unknown";
    if (fit != file_index_.end())
        component = corpus_->files[static_cast<std::size_t>(fit->second)].component;

    auto cit = component_files_.find(component);
    if (component == "unknown" || cit == component_files_.end()) {
        RetrievalResult out = fallback(query, k, "doc_component", true);
        out.latency_ms = elapsed_ms(start);
        return out;
    }
    std::vector<int> statements;
    for (int f : cit->second)
        for (int s : file_statements_[static_cast<std::size_t>(f)]) statements.push_back(s);
    int available = 0;
    for (int s : statements)
        if (corpus_->statements[static_cast<std::size_t>(s)].file != query.file) ++available;
    if (available < k) {
        RetrievalResult out = fallback(query, k, "doc_component", true);
        out.latency_ms = elapsed_ms(start);
        return out;
    }

    RetrievalResult out;
    out.mode = "doc_component";
    sample_into(out, statements, query.file, k,
                Rng::hash_string(query.statement_id) ^ Rng::hash_string("doc_component"));
    out.latency_ms = elapsed_ms(start);
    return out;
}

RetrievalIndex::AnnCheckReport RetrievalIndex::exact_vs_ann_check(
    std::span<const int> statement_indices, ClusterMode mode, int k) const {
    AnnCheckReport report;
    for (int s : statement_indices) {
        const auto& st = corpus_->statements[static_cast<std::size_t>(s)];
        RetrievalQuery q{st.file, st.id};
        RetrievalResult exact = retrieve(q, mode, k, /*use_ann=*/false);
        RetrievalResult approx = retrieve(q, mode, k, /*use_ann=*/true);
        ++report.targets;
        auto ids = [](const RetrievalResult& r) {
            std::vector<int> v;
            for (const auto& e : r.examples) v.push_back(e.statement);
            std::sort(v.begin(), v.end());
            return v;
        };
        if (ids(exact) != ids(approx)) ++report.mismatched;
    }
    report.mismatch_rate =
        report.targets > 0 ? static_cast<double>(report.mismatched) / report.targets : 0.0;
    return report;
}

}  // namespace loghint
