#include "loghint/ownership.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace loghint {

OwnershipMatrix build_ownership_matrix(std::span<const CommitRecord> commits,
                                       const std::vector<std::string>& files,
                                       const DecayConfig& decay,
                                       std::int64_t reference_time) {
    OwnershipMatrix m;
    m.files = files;
    m.reference_time = reference_time;

    std::set<std::string> author_set;
    for (const auto& c : commits) author_set.insert(c.author);
    m.authors.assign(author_set.begin(), author_set.end());

    std::unordered_map<std::string, int> author_index;
    for (std::size_t i = 0; i < m.authors.size(); ++i)
        author_index[m.authors[i]] = static_cast<int>(i);
    std::unordered_map<std::string, int> file_index;
    for (std::size_t i = 0; i < files.size(); ++i) file_index[files[i]] = static_cast<int>(i);

    // Dense accumulation per file via maps keeps the pass single and ordered.
    std::vector<std::map<int, double>> acc(files.size());
    const double seconds_per_day = 86400.0;
    for (const auto& c : commits) {
        double age_days =
            static_cast<double>(reference_time - c.timestamp) / seconds_per_day;
        double weight = std::pow(0.5, age_days / decay.half_life_days);
        int a = author_index.at(c.author);
        for (const auto& path : c.touched_files) {
            auto it = file_index.find(path);
            if (it == file_index.end()) {
                ++m.ignored_paths;
                continue;
            }
            acc[static_cast<std::size_t>(it->second)][a] += weight;
        }
    }

    m.rows.resize(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        m.rows[i].assign(acc[i].begin(), acc[i].end());
    }
    return m;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    std::size_t n = std::min(u.size(), v.size());
    for (std::size_t i = 0; i < n; ++i) dot += u[i] * v[i];
    for (double x : u) nu += x * x;
    for (double x : v) nv += x * x;
    if (nu <= 0.0 || nv <= 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double cosine_similarity(const OwnershipRow& u, const OwnershipRow& v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (const auto& [_, w] : u) nu += w * w;
    for (const auto& [_, w] : v) nv += w * w;
    if (nu <= 0.0 || nv <= 0.0) return 0.0;
    std::size_t i = 0, j = 0;
    while (i < u.size() && j < v.size()) {
        if (u[i].first == v[j].first) {
            dot += u[i].second * v[j].second;
            ++i;
            ++j;
        } else if (u[i].first < v[j].first) {
            ++i;
        } else {
            ++j;
        }
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

WeightedGraph ownership_knn_graph(const OwnershipMatrix& matrix, int k) {
    return knn_graph(static_cast<int>(matrix.rows.size()), k, [&](int i, int j) {
        return cosine_similarity(matrix.rows[static_cast<std::size_t>(i)],
                                 matrix.rows[static_cast<std::size_t>(j)]);
    });
}

void write_ownership_jsonl(const OwnershipMatrix& matrix, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError("cannot write " + file.string());
    for (std::size_t i = 0; i < matrix.files.size(); ++i) {
        nlohmann::ordered_json weights = nlohmann::ordered_json::object();
        for (const auto& [a, w] : matrix.rows[i])
            weights[matrix.authors[static_cast<std::size_t>(a)]] = w;
        nlohmann::ordered_json rec{{"file", matrix.files[i]}, {"weights", weights}};
        out << rec.dump() << '\n';
    }
}

}  // namespace loghint
