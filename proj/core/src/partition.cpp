#include "loghint/partition.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace loghint {

using ordered_json = nlohmann::ordered_json;

std::string to_string(ClusterMode mode) {
    switch (mode) {
        case ClusterMode::semantic: return "semantic";
        case ClusterMode::ownership: return "ownership";
        case ClusterMode::multiplex: return "multiplex";
    }
    return "semantic";
}

std::optional<ClusterMode> cluster_mode_from(std::string_view name) {
    if (name == "semantic") return ClusterMode::semantic;
    if (name == "ownership") return ClusterMode::ownership;
    if (name == "multiplex") return ClusterMode::multiplex;
    return std::nullopt;
}

bool Partition::has_flag(std::string_view f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void relabel_contiguous(std::vector<int>& labels, int* cluster_count) {
    std::unordered_map<int, int> remap;
    int next = 0;
    for (int& l : labels) {
        if (l == kNoise) continue;
        auto [it, inserted] = remap.emplace(l, next);
        if (inserted) ++next;
        l = it->second;
    }
    if (cluster_count) *cluster_count = next;
}

void relabel_contiguous(Partition& p) {
    relabel_contiguous(p.assignment, &p.cluster_count);
}

void apply_min_community_size(Partition& p, int min_size) {
    std::unordered_map<int, int> sizes;
    for (int l : p.assignment)
        if (l != kNoise) ++sizes[l];
    for (int& l : p.assignment)
        if (l != kNoise && sizes[l] < min_size) l = kNoise;
    relabel_contiguous(p);
    p.quality.coverage = coverage_of(p.assignment);
}

double coverage_of(const std::vector<int>& labels) {
    if (labels.empty()) return 1.0;
    std::size_t assigned = 0;
    for (int l : labels)
        if (l != kNoise) ++assigned;
    return static_cast<double>(assigned) / static_cast<double>(labels.size());
}

namespace {

ordered_json quality_json(const PartitionQuality& q) {
    ordered_json j = ordered_json::object();
    if (q.silhouette) j["silhouette"] = *q.silhouette;
    if (q.dbi) j["dbi"] = *q.dbi;
    if (q.dbcv) j["dbcv"] = *q.dbcv;
    if (q.modularity) j["modularity"] = *q.modularity;
    j["coverage"] = q.coverage;
    return j;
}

}  // namespace

void write_partition_json(const Partition& p, const std::filesystem::path& file) {
    ordered_json j;
    j["mode"] = to_string(p.mode);
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : p.num_params) params[k] = v;
    for (const auto& [k, v] : p.str_params) params[k] = v;
    j["params"] = params;
    j["seed"] = p.seed;
    j["quality"] = quality_json(p.quality);
    j["flags"] = p.flags;
    ordered_json assignment = ordered_json::object();
    // items are corpus file paths in corpus order, already sorted
    for (std::size_t i = 0; i < p.items.size(); ++i) {
        int l = p.assignment.at(i);
        if (l == kNoise)
            assignment[p.items[i]] = "NOISE";
        else
            assignment[p.items[i]] = l;
    }
    j["assignment"] = assignment;

    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

Partition read_partition_json(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    ordered_json j = ordered_json::parse(in);

    Partition p;
    auto mode = cluster_mode_from(j.at("mode").get<std::string>());
    if (!mode) throw std::runtime_error("unknown partition mode in " + file.string());
    p.mode = *mode;
    for (const auto& [k, v] : j.at("params").items()) {
        if (v.is_number())
            p.num_params[k] = v.get<double>();
        else
            p.str_params[k] = v.get<std::string>();
    }
    p.seed = j.at("seed").get<std::uint64_t>();
    const auto& q = j.at("quality");
    if (q.contains("silhouette")) p.quality.silhouette = q["silhouette"].get<double>();
    if (q.contains("dbi")) p.quality.dbi = q["dbi"].get<double>();
    if (q.contains("dbcv")) p.quality.dbcv = q["dbcv"].get<double>();
    if (q.contains("modularity")) p.quality.modularity = q["modularity"].get<double>();
    p.quality.coverage = q.at("coverage").get<double>();
    if (j.contains("flags")) p.flags = j["flags"].get<std::vector<std::string>>();
    int max_id = -1;
    for (const auto& [path, v] : j.at("assignment").items()) {
        p.items.push_back(path);
        if (v.is_string()) {
            p.assignment.push_back(kNoise);
        } else {
            p.assignment.push_back(v.get<int>());
            max_id = std::max(max_id, p.assignment.back());
        }
    }
    p.cluster_count = max_id + 1;
    return p;
}

}  // namespace loghint
