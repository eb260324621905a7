#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace loghint {

/// Assignment value for files outside every cluster.
inline constexpr int kNoise = -1;

enum class ClusterMode { semantic, ownership, multiplex };

std::string to_string(ClusterMode mode);
std::optional<ClusterMode> cluster_mode_from(std::string_view name);

struct PartitionQuality {
    std::optional<double> silhouette;
    std::optional<double> dbi;
    std::optional<double> dbcv;
    std::optional<double> modularity;
    double coverage = 1.0;  // fraction of items not NOISE
};

struct Partition {
    std::vector<int> assignment;  // per item: cluster id or kNoise
    ClusterMode mode = ClusterMode::semantic;
    PartitionQuality quality;
    std::map<std::string, double> num_params;
    std::map<std::string, std::string> str_params;
    std::vector<std::string> flags;  // e.g. "degenerate", "target_modularity_missed"
    std::uint64_t seed = 0;
    int cluster_count = 0;
    std::vector<std::string> items;  // file paths; empty for label-only partitions

    bool has_flag(std::string_view f) const;
};

/// Renumber cluster ids to contiguous 0..C-1, ordered by first appearance
/// (i.e. by smallest member index); kNoise is preserved.
void relabel_contiguous(Partition& p);
void relabel_contiguous(std::vector<int>& labels, int* cluster_count = nullptr);

/// Communities smaller than min_size become NOISE, then ids are re-packed.
void apply_min_community_size(Partition& p, int min_size);

double coverage_of(const std::vector<int>& labels);

/// `partition.<mode>.json`: {mode, params, seed, quality, assignment}.
void write_partition_json(const Partition& p, const std::filesystem::path& file);
Partition read_partition_json(const std::filesystem::path& file);

}  // namespace loghint
