#include "loghint/cluster_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "loghint/partition.hpp"

namespace loghint {

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Map labels to 0..C-1 cluster member lists, skipping noise.
std::vector<std::vector<int>> cluster_members(std::span<const int> labels) {
    std::map<int, std::vector<int>> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != kNoise) by_label[labels[i]].push_back(static_cast<int>(i));
    std::vector<std::vector<int>> out;
    out.reserve(by_label.size());
    for (auto& [_, members] : by_label) out.push_back(std::move(members));
    return out;
}

}  // namespace

std::optional<double> silhouette_score(const std::vector<std::vector<double>>& points,
                                       std::span<const int> labels) {
    auto clusters = cluster_members(labels);
    if (clusters.size() < 2) return std::nullopt;

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        for (int p : clusters[ci]) {
            double a = 0.0;
            if (clusters[ci].size() > 1) {
                for (int q : clusters[ci])
                    if (q != p) a += euclidean(points[static_cast<std::size_t>(p)],
                                               points[static_cast<std::size_t>(q)]);
                a /= static_cast<double>(clusters[ci].size() - 1);
            } else {
                total += 0.0;  // singleton: s(i) = 0
                ++count;
                continue;
            }
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t cj = 0; cj < clusters.size(); ++cj) {
                if (cj == ci) continue;
                double mean = 0.0;
                for (int q : clusters[cj])
                    mean += euclidean(points[static_cast<std::size_t>(p)],
                                      points[static_cast<std::size_t>(q)]);
                mean /= static_cast<double>(clusters[cj].size());
                b = std::min(b, mean);
            }
            double denom = std::max(a, b);
            total += denom > 0.0 ? (b - a) / denom : 0.0;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return total / static_cast<double>(count);
}

std::optional<double> davies_bouldin_index(const std::vector<std::vector<double>>& points,
                                           std::span<const int> labels) {
    auto clusters = cluster_members(labels);
    if (clusters.size() < 2) return std::nullopt;
    const std::size_t dim = points.empty() ? 0 : points[0].size();

    std::vector<std::vector<double>> centroids(clusters.size(), std::vector<double>(dim, 0.0));
    std::vector<double> dispersion(clusters.size(), 0.0);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (int p : clusters[c])
            for (std::size_t j = 0; j < dim; ++j)
                centroids[c][j] += points[static_cast<std::size_t>(p)][j];
        for (std::size_t j = 0; j < dim; ++j)
            centroids[c][j] /= static_cast<double>(clusters[c].size());
        for (int p : clusters[c])
            dispersion[c] += euclidean(points[static_cast<std::size_t>(p)], centroids[c]);
        dispersion[c] /= static_cast<double>(clusters[c].size());
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < clusters.size(); ++j) {
            if (i == j) continue;
            double sep = euclidean(centroids[i], centroids[j]);
            double r = sep > 0.0 ? (dispersion[i] + dispersion[j]) / sep
                                 : std::numeric_limits<double>::infinity();
            worst = std::max(worst, r);
        }
        sum += worst;
    }
    return sum / static_cast<double>(clusters.size());
}

std::optional<double> dbcv_score(const std::vector<std::vector<double>>& points,
                                 std::span<const int> labels) {
    auto clusters = cluster_members(labels);
    if (clusters.size() < 2) return std::nullopt;
    const double dim = points.empty() ? 1.0 : static_cast<double>(points[0].size());
    constexpr double kTiny = 1e-12;

    // All-points core distance per point, against its own cluster.
    std::vector<double> apts(points.size(), 0.0);
    for (const auto& members : clusters) {
        if (members.size() < 2) {
            for (int p : members) apts[static_cast<std::size_t>(p)] = 0.0;
            continue;
        }
        for (int p : members) {
            double acc = 0.0;
            for (int q : members) {
                if (q == p) continue;
                double d = std::max(kTiny, euclidean(points[static_cast<std::size_t>(p)],
                                                     points[static_cast<std::size_t>(q)]));
                acc += std::pow(1.0 / d, dim);
            }
            acc /= static_cast<double>(members.size() - 1);
            apts[static_cast<std::size_t>(p)] = std::pow(acc, -1.0 / dim);
        }
    }

    auto mreach = [&](int p, int q) {
        double d = euclidean(points[static_cast<std::size_t>(p)], points[static_cast<std::size_t>(q)]);
        return std::max({d, apts[static_cast<std::size_t>(p)], apts[static_cast<std::size_t>(q)]});
    };

    // Density sparseness: max internal-node edge of the cluster's
    // mutual-reachability MST (all edges for 2-point clusters).
    std::vector<double> sparseness(clusters.size(), 0.0);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& members = clusters[c];
        const std::size_t m = members.size();
        if (m < 2) {
            sparseness[c] = 0.0;
            continue;
        }
        // Prim MST over the complete mutual-reachability graph.
        std::vector<bool> in_tree(m, false);
        std::vector<double> best(m, std::numeric_limits<double>::infinity());
        std::vector<int> parent(m, -1);
        std::vector<std::pair<int, int>> tree_edges;  // local indices
        std::vector<double> tree_weights;
        best[0] = 0.0;
        for (std::size_t step = 0; step < m; ++step) {
            int u = -1;
            for (std::size_t i = 0; i < m; ++i)
                if (!in_tree[i] && (u == -1 || best[i] < best[static_cast<std::size_t>(u)]))
                    u = static_cast<int>(i);
            in_tree[static_cast<std::size_t>(u)] = true;
            if (parent[static_cast<std::size_t>(u)] >= 0) {
                tree_edges.emplace_back(parent[static_cast<std::size_t>(u)], u);
                tree_weights.push_back(best[static_cast<std::size_t>(u)]);
            }
            for (std::size_t i = 0; i < m; ++i) {
                if (in_tree[i]) continue;
                double w = mreach(members[static_cast<std::size_t>(u)], members[i]);
                if (w < best[i]) {
                    best[i] = w;
                    parent[i] = u;
                }
            }
        }
        std::vector<int> degree(m, 0);
        for (auto [a, b] : tree_edges) {
            ++degree[static_cast<std::size_t>(a)];
            ++degree[static_cast<std::size_t>(b)];
        }
        double max_internal = 0.0;
        bool found = false;
        for (std::size_t e = 0; e < tree_edges.size(); ++e) {
            auto [a, b] = tree_edges[e];
            if (degree[static_cast<std::size_t>(a)] > 1 && degree[static_cast<std::size_t>(b)] > 1) {
                max_internal = std::max(max_internal, tree_weights[e]);
                found = true;
            }
        }
        if (!found)
            max_internal = *std::max_element(tree_weights.begin(), tree_weights.end());
        sparseness[c] = max_internal;
    }

    // Density separation: min pairwise mutual reachability across clusters.
    double validity_sum = 0.0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        double min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < clusters.size(); ++j) {
            if (i == j) continue;
            for (int p : clusters[i])
                for (int q : clusters[j]) min_sep = std::min(min_sep, mreach(p, q));
        }
        double denom = std::max(min_sep, sparseness[i]);
        double v = denom > 0.0 ? (min_sep - sparseness[i]) / denom : 0.0;
        validity_sum += v * static_cast<double>(clusters[i].size());
    }
    return validity_sum / static_cast<double>(labels.size());
}

double modularity(const WeightedGraph& g, std::span<const int> labels, double resolution) {
    double m = g.total_weight();
    if (m <= 0.0) return 0.0;

    // Noise items act as singletons: unique negative ids below kNoise.
    std::vector<int> effective(labels.begin(), labels.end());
    int next = -2;
    for (int& l : effective)
        if (l == kNoise) l = next--;

    std::map<int, double> w_in, degree_sum;
    auto degrees = g.weighted_degrees();
    for (std::size_t i = 0; i < effective.size() && i < degrees.size(); ++i)
        degree_sum[effective[i]] += degrees[i];
    for (const auto& e : g.edges) {
        if (effective[static_cast<std::size_t>(e.u)] == effective[static_cast<std::size_t>(e.v)])
            w_in[effective[static_cast<std::size_t>(e.u)]] += e.w;
    }

    double q = 0.0;
    for (const auto& [label, k] : degree_sum) {
        double internal = 0.0;
        if (auto it = w_in.find(label); it != w_in.end()) internal = it->second;
        double frac = k / (2.0 * m);
        q += internal / m - resolution * frac * frac;
    }
    return q;
}

double multiplex_modularity(const MultiplexGraph& layers, std::span<const int> labels,
                            std::span<const double> layer_weights, double resolution) {
    double q = 0.0;
    for (std::size_t l = 0; l < layers.layers.size(); ++l) {
        double w = l < layer_weights.size() ? layer_weights[l] : 1.0;
        if (w == 0.0) continue;
        q += w * modularity(layers.layers[l], labels, resolution);
    }
    return q;
}

IntraInterCosine intra_inter_cosine(const std::function<double(int, int)>& similarity,
                                    std::span<const int> labels) {
    auto clusters = cluster_members(labels);
    IntraInterCosine out;
    if (clusters.empty()) return out;

    double intra_sum = 0.0;
    std::size_t intra_n = 0;
    std::vector<double> per_cluster;
    for (const auto& members : clusters) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                sum += similarity(members[a], members[b]);
                ++n;
            }
        intra_sum += sum;
        intra_n += n;
        if (n > 0) per_cluster.push_back(sum / static_cast<double>(n));
    }
    if (intra_n > 0) out.intra_global = intra_sum / static_cast<double>(intra_n);
    if (!per_cluster.empty())
        out.intra_per_cluster = std::accumulate(per_cluster.begin(), per_cluster.end(), 0.0) /
                                static_cast<double>(per_cluster.size());

    double inter_sum = 0.0;
    std::size_t inter_n = 0;
    std::vector<double> per_pair;
    for (std::size_t i = 0; i < clusters.size(); ++i)
        for (std::size_t j = i + 1; j < clusters.size(); ++j) {
            double sum = 0.0;
            std::size_t n = 0;
            for (int p : clusters[i])
                for (int q : clusters[j]) {
                    sum += similarity(p, q);
                    ++n;
                }
            inter_sum += sum;
            inter_n += n;
            if (n > 0) per_pair.push_back(sum / static_cast<double>(n));
        }
    if (inter_n > 0) out.inter_global = inter_sum / static_cast<double>(inter_n);
    if (!per_pair.empty())
        out.inter_per_pair = std::accumulate(per_pair.begin(), per_pair.end(), 0.0) /
                             static_cast<double>(per_pair.size());
    return out;
}

}  // namespace loghint
