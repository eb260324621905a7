#include "loghint/leiden.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

#include "loghint/cluster_metrics.hpp"
#include "loghint/rng.hpp"

namespace loghint {

namespace {

constexpr double kEps = 1e-12;

/// One layer of the working (possibly aggregated) graph. Self-loop weight is
/// the aggregated internal weight of a super-node; it moves with the node and
/// never enters the node-to-community weights.
struct Layer {
    double alpha = 1.0;  // layer weight in the objective
    double m = 0.0;      // total weight incl. self-loops
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<double> self_w;
    std::vector<double> degree;  // 2*self_w + sum of incident edge weights
};

struct Working {
    int n = 0;
    std::vector<Layer> layers;
};

Working make_working(const std::vector<const WeightedGraph*>& graphs,
                     const std::vector<double>& alphas) {
    Working w;
    w.n = graphs.empty() ? 0 : graphs[0]->node_count;
    for (std::size_t l = 0; l < graphs.size(); ++l) {
        Layer layer;
        layer.alpha = alphas[l];
        layer.adj.resize(static_cast<std::size_t>(w.n));
        layer.self_w.assign(static_cast<std::size_t>(w.n), 0.0);
        layer.degree.assign(static_cast<std::size_t>(w.n), 0.0);
        for (const auto& e : graphs[l]->edges) {
            layer.adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.w);
            layer.adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.w);
            layer.degree[static_cast<std::size_t>(e.u)] += e.w;
            layer.degree[static_cast<std::size_t>(e.v)] += e.w;
            layer.m += e.w;
        }
        w.layers.push_back(std::move(layer));
    }
    return w;
}

/// Community bookkeeping for one working graph.
struct CommunityState {
    std::vector<int> comm;                         // node -> community id
    std::vector<int> size;                         // community -> member count
    std::vector<std::vector<double>> degree_sum;   // layer -> community -> sum of degrees
    int community_count = 0;

    void init_singletons(const Working& w) {
        comm.resize(static_cast<std::size_t>(w.n));
        std::iota(comm.begin(), comm.end(), 0);
        size.assign(static_cast<std::size_t>(w.n), 1);
        degree_sum.assign(w.layers.size(), {});
        for (std::size_t l = 0; l < w.layers.size(); ++l)
            degree_sum[l] = w.layers[l].degree;
        community_count = w.n;
    }

    void init_from(const Working& w, const std::vector<int>& labels, int label_count) {
        comm = labels;
        size.assign(static_cast<std::size_t>(label_count), 0);
        degree_sum.assign(w.layers.size(),
                          std::vector<double>(static_cast<std::size_t>(label_count), 0.0));
        for (int v = 0; v < w.n; ++v) {
            ++size[static_cast<std::size_t>(comm[static_cast<std::size_t>(v)])];
            for (std::size_t l = 0; l < w.layers.size(); ++l)
                degree_sum[l][static_cast<std::size_t>(comm[static_cast<std::size_t>(v)])] +=
                    w.layers[l].degree[static_cast<std::size_t>(v)];
        }
        community_count = 0;
        for (int s : size)
            if (s > 0) ++community_count;
    }

    int add_community(std::size_t layer_count) {
        size.push_back(0);
        for (std::size_t l = 0; l < layer_count; ++l) degree_sum[l].push_back(0.0);
        return static_cast<int>(size.size()) - 1;
    }

    void move(const Working& w, int v, int to) {
        int from = comm[static_cast<std::size_t>(v)];
        if (from == to) return;
        --size[static_cast<std::size_t>(from)];
        ++size[static_cast<std::size_t>(to)];
        if (size[static_cast<std::size_t>(from)] == 0) --community_count;
        if (size[static_cast<std::size_t>(to)] == 1) ++community_count;
        for (std::size_t l = 0; l < w.layers.size(); ++l) {
            double k = w.layers[l].degree[static_cast<std::size_t>(v)];
            degree_sum[l][static_cast<std::size_t>(from)] -= k;
            degree_sum[l][static_cast<std::size_t>(to)] += k;
        }
        comm[static_cast<std::size_t>(v)] = to;
    }
};

/// Gain of moving v from its community to `to` (pass -1 for a fresh empty
/// community). `w_to` holds per-layer edge weight from v into each candidate.
double move_gain(const Working& w, const CommunityState& st, int v, int to,
                 const std::vector<std::map<int, double>>& w_to, double gamma) {
    int from = st.comm[static_cast<std::size_t>(v)];
    double gain = 0.0;
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const Layer& layer = w.layers[l];
        if (layer.m <= 0.0 || layer.alpha == 0.0) continue;
        double k_v = layer.degree[static_cast<std::size_t>(v)];
        double w_b = 0.0, k_b = 0.0;
        if (to >= 0) {
            if (auto it = w_to[l].find(to); it != w_to[l].end()) w_b = it->second;
            k_b = st.degree_sum[l][static_cast<std::size_t>(to)];
        }
        double w_a = 0.0;
        if (auto it = w_to[l].find(from); it != w_to[l].end()) w_a = it->second;
        double k_a = st.degree_sum[l][static_cast<std::size_t>(from)];
        double dq = (w_b - w_a) / layer.m -
                    gamma * k_v * (k_b - k_a + k_v) / (2.0 * layer.m * layer.m);
        gain += layer.alpha * dq;
    }
    return gain;
}

/// Queue-based local moving. Returns whether any node moved.
bool local_move(const Working& w, CommunityState& st, double gamma, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(w.n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::deque<int> queue(order.begin(), order.end());
    std::vector<bool> queued(static_cast<std::size_t>(w.n), true);
    bool any_moved = false;

    std::vector<std::map<int, double>> w_to(w.layers.size());
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        queued[static_cast<std::size_t>(v)] = false;

        for (auto& m : w_to) m.clear();
        std::vector<int> candidates;
        for (std::size_t l = 0; l < w.layers.size(); ++l) {
            for (const auto& [u, weight] : w.layers[l].adj[static_cast<std::size_t>(v)]) {
                int c = st.comm[static_cast<std::size_t>(u)];
                auto [it, inserted] = w_to[l].emplace(c, weight);
                if (!inserted) it->second += weight;
                if (inserted) candidates.push_back(c);
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        int from = st.comm[static_cast<std::size_t>(v)];
        double best_gain = kEps;
        int best = from;
        for (int c : candidates) {
            if (c == from) continue;
            double g = move_gain(w, st, v, c, w_to, gamma);
            if (g > best_gain) {
                best_gain = g;
                best = c;
            }
        }
        // Leaving for a fresh community can also pay off.
        if (st.size[static_cast<std::size_t>(from)] > 1) {
            double g = move_gain(w, st, v, -1, w_to, gamma);
            if (g > best_gain) {
                best_gain = g;
                best = -1;
            }
        }
        if (best == from) continue;
        if (best == -1) best = st.add_community(w.layers.size());
        st.move(w, v, best);
        any_moved = true;

        // Revisit neighbors that might now want to follow or flee.
        for (std::size_t l = 0; l < w.layers.size(); ++l) {
            for (const auto& [u, weight] : w.layers[l].adj[static_cast<std::size_t>(v)]) {
                (void)weight;
                if (!queued[static_cast<std::size_t>(u)] &&
                    st.comm[static_cast<std::size_t>(u)] != best) {
                    queue.push_back(u);
                    queued[static_cast<std::size_t>(u)] = true;
                }
            }
        }
    }
    return any_moved;
}

/// Refinement: inside each community of `st`, grow well-connected refined
/// communities from singletons. Only merges backed by actual edges happen,
/// which keeps every refined community connected.
std::vector<int> refine(const Working& w, const CommunityState& st, double gamma, Rng& rng,
                        int* refined_count) {
    const std::size_t n = static_cast<std::size_t>(w.n);
    std::vector<int> refined(n);
    std::iota(refined.begin(), refined.end(), 0);
    std::vector<int> r_size(n, 1);
    // Per layer: refined-community degree sums and cut to the rest of S.
    std::vector<std::vector<double>> r_deg(w.layers.size());
    std::vector<std::vector<double>> r_cut(w.layers.size());
    std::vector<std::vector<double>> s_deg(w.layers.size());  // community S degree sums
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        r_deg[l] = w.layers[l].degree;
        r_cut[l].assign(n, 0.0);
        s_deg[l] = st.degree_sum[l];
    }

    // Group members per community, ordered by node id.
    std::map<int, std::vector<int>> members;
    for (int v = 0; v < w.n; ++v) members[st.comm[static_cast<std::size_t>(v)]].push_back(v);

    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        for (int v = 0; v < w.n; ++v) {
            double cut = 0.0;
            for (const auto& [u, weight] : w.layers[l].adj[static_cast<std::size_t>(v)])
                if (st.comm[static_cast<std::size_t>(u)] == st.comm[static_cast<std::size_t>(v)])
                    cut += weight;
            r_cut[l][static_cast<std::size_t>(v)] = cut;
        }
    }

    auto well_connected_node = [&](int v, int s) {
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t l = 0; l < w.layers.size(); ++l) {
            const Layer& layer = w.layers[l];
            if (layer.m <= 0.0 || layer.alpha == 0.0) continue;
            double within = 0.0;
            for (const auto& [u, weight] : layer.adj[static_cast<std::size_t>(v)])
                if (st.comm[static_cast<std::size_t>(u)] == s) within += weight;
            double k_v = layer.degree[static_cast<std::size_t>(v)];
            double k_s = s_deg[l][static_cast<std::size_t>(s)];
            lhs += layer.alpha * within / layer.m;
            rhs += layer.alpha * gamma * k_v * (k_s - k_v) / (2.0 * layer.m * layer.m);
        }
        return lhs >= rhs - kEps;
    };
    auto well_connected_refined = [&](int rc, int s) {
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t l = 0; l < w.layers.size(); ++l) {
            const Layer& layer = w.layers[l];
            if (layer.m <= 0.0 || layer.alpha == 0.0) continue;
            double k_c = r_deg[l][static_cast<std::size_t>(rc)];
            double k_s = s_deg[l][static_cast<std::size_t>(s)];
            lhs += layer.alpha * r_cut[l][static_cast<std::size_t>(rc)] / layer.m;
            rhs += layer.alpha * gamma * k_c * (k_s - k_c) / (2.0 * layer.m * layer.m);
        }
        return lhs >= rhs - kEps;
    };

    std::vector<std::map<int, double>> w_to(w.layers.size());
    for (auto& [s, nodes] : members) {
        if (nodes.size() < 2) continue;
        std::vector<int> order = nodes;
        rng.shuffle(order);
        for (int v : order) {
            if (r_size[static_cast<std::size_t>(refined[static_cast<std::size_t>(v)])] != 1) continue;
            if (!well_connected_node(v, s)) continue;

            for (auto& m : w_to) m.clear();
            std::vector<int> candidates;
            for (std::size_t l = 0; l < w.layers.size(); ++l) {
                for (const auto& [u, weight] : w.layers[l].adj[static_cast<std::size_t>(v)]) {
                    if (st.comm[static_cast<std::size_t>(u)] != s) continue;
                    int rc = refined[static_cast<std::size_t>(u)];
                    if (rc == refined[static_cast<std::size_t>(v)]) continue;
                    auto [it, inserted] = w_to[l].emplace(rc, weight);
                    if (!inserted) it->second += weight;
                    if (inserted) candidates.push_back(rc);
                }
            }
            std::sort(candidates.begin(), candidates.end());
            candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

            double best_gain = -kEps;
            int best = -1;
            for (int rc : candidates) {
                if (!well_connected_refined(rc, s)) continue;
                double gain = 0.0;
                for (std::size_t l = 0; l < w.layers.size(); ++l) {
                    const Layer& layer = w.layers[l];
                    if (layer.m <= 0.0 || layer.alpha == 0.0) continue;
                    double k_v = layer.degree[static_cast<std::size_t>(v)];
                    double w_b = 0.0;
                    if (auto it = w_to[l].find(rc); it != w_to[l].end()) w_b = it->second;
                    double k_b = r_deg[l][static_cast<std::size_t>(rc)];
                    // v is a singleton refined community: w(v->own) = 0, K_a = k_v.
                    double dq = w_b / layer.m -
                                gamma * k_v * (k_b - k_v + k_v) / (2.0 * layer.m * layer.m);
                    gain += layer.alpha * dq;
                }
                if (gain > best_gain) {
                    best_gain = gain;
                    best = rc;
                }
            }
            if (best < 0) continue;

            int old = refined[static_cast<std::size_t>(v)];
            refined[static_cast<std::size_t>(v)] = best;
            r_size[static_cast<std::size_t>(best)] += 1;
            r_size[static_cast<std::size_t>(old)] -= 1;
            for (std::size_t l = 0; l < w.layers.size(); ++l) {
                double k_v = w.layers[l].degree[static_cast<std::size_t>(v)];
                r_deg[l][static_cast<std::size_t>(best)] += k_v;
                r_deg[l][static_cast<std::size_t>(old)] -= k_v;
                double to_best = 0.0;
                if (auto it = w_to[l].find(best); it != w_to[l].end()) to_best = it->second;
                r_cut[l][static_cast<std::size_t>(best)] +=
                    r_cut[l][static_cast<std::size_t>(v)] - 2.0 * to_best;
            }
        }
    }

    // Relabel refined communities contiguously, ordered by smallest member.
    std::vector<int> remap(n, -1);
    int next = 0;
    for (std::size_t v = 0; v < n; ++v) {
        int rc = refined[v];
        if (remap[static_cast<std::size_t>(rc)] == -1) remap[static_cast<std::size_t>(rc)] = next++;
        refined[v] = remap[static_cast<std::size_t>(rc)];
    }
    *refined_count = next;
    return refined;
}

Working aggregate(const Working& w, const std::vector<int>& refined, int refined_count) {
    Working out;
    out.n = refined_count;
    for (const auto& layer : w.layers) {
        Layer agg;
        agg.alpha = layer.alpha;
        agg.adj.resize(static_cast<std::size_t>(refined_count));
        agg.self_w.assign(static_cast<std::size_t>(refined_count), 0.0);
        agg.degree.assign(static_cast<std::size_t>(refined_count), 0.0);

        std::map<std::pair<int, int>, double> acc;
        for (int v = 0; v < w.n; ++v) {
            int rv = refined[static_cast<std::size_t>(v)];
            agg.self_w[static_cast<std::size_t>(rv)] += layer.self_w[static_cast<std::size_t>(v)];
            for (const auto& [u, weight] : layer.adj[static_cast<std::size_t>(v)]) {
                if (u < v) continue;  // each undirected edge once
                int ru = refined[static_cast<std::size_t>(u)];
                if (rv == ru)
                    agg.self_w[static_cast<std::size_t>(rv)] += weight;
                else
                    acc[{std::min(rv, ru), std::max(rv, ru)}] += weight;
            }
        }
        for (const auto& [key, weight] : acc) {
            agg.adj[static_cast<std::size_t>(key.first)].emplace_back(key.second, weight);
            agg.adj[static_cast<std::size_t>(key.second)].emplace_back(key.first, weight);
            agg.degree[static_cast<std::size_t>(key.first)] += weight;
            agg.degree[static_cast<std::size_t>(key.second)] += weight;
            agg.m += weight;
        }
        for (int v = 0; v < refined_count; ++v) {
            agg.degree[static_cast<std::size_t>(v)] += 2.0 * agg.self_w[static_cast<std::size_t>(v)];
            agg.m += agg.self_w[static_cast<std::size_t>(v)];
        }
        out.layers.push_back(std::move(agg));
    }
    return out;
}

/// Split communities that ended up disconnected (possible after local moving
/// alone) into their connected components; this never lowers modularity.
void split_disconnected(const std::vector<const WeightedGraph*>& graphs, std::vector<int>& labels) {
    const std::size_t n = labels.size();
    std::vector<std::vector<int>> adj(n);
    for (const auto* g : graphs) {
        for (const auto& e : g->edges) {
            adj[static_cast<std::size_t>(e.u)].push_back(e.v);
            adj[static_cast<std::size_t>(e.v)].push_back(e.u);
        }
    }
    std::vector<int> component(n, -1);
    int next = 0;
    for (std::size_t start = 0; start < n; ++start) {
        if (component[start] != -1) continue;
        int id = next++;
        std::vector<std::size_t> stack{start};
        component[start] = id;
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            for (int u : adj[v]) {
                if (component[static_cast<std::size_t>(u)] == -1 &&
                    labels[static_cast<std::size_t>(u)] == labels[v]) {
                    component[static_cast<std::size_t>(u)] = id;
                    stack.push_back(static_cast<std::size_t>(u));
                }
            }
        }
    }
    labels = component;
}

std::vector<int> run_leiden(const std::vector<const WeightedGraph*>& graphs,
                            const std::vector<double>& alphas, double gamma, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x1e1de2));
    Working w = make_working(graphs, alphas);
    const int n_orig = w.n;

    std::vector<int> flat(static_cast<std::size_t>(n_orig));
    std::iota(flat.begin(), flat.end(), 0);

    CommunityState st;
    st.init_singletons(w);

    for (int round = 0; round < 64; ++round) {
        bool moved = local_move(w, st, gamma, rng);
        if (st.community_count == w.n && !moved) break;  // all singletons, stable

        int refined_count = 0;
        std::vector<int> refined = refine(w, st, gamma, rng, &refined_count);
        if (refined_count == w.n) {
            // Refinement kept everything singleton: aggregation would be the
            // identity, so the partition is final.
            break;
        }

        // Carry the partition to the aggregated graph.
        std::vector<int> agg_comm(static_cast<std::size_t>(refined_count), -1);
        for (int v = 0; v < w.n; ++v)
            agg_comm[static_cast<std::size_t>(refined[static_cast<std::size_t>(v)])] =
                st.comm[static_cast<std::size_t>(v)];
        // Compact community labels.
        std::map<int, int> remap;
        for (int& c : agg_comm) {
            auto [it, inserted] = remap.emplace(c, static_cast<int>(remap.size()));
            c = it->second;
        }

        Working next = aggregate(w, refined, refined_count);
        for (int v = 0; v < n_orig; ++v)
            flat[static_cast<std::size_t>(v)] =
                refined[static_cast<std::size_t>(flat[static_cast<std::size_t>(v)])];
        w = std::move(next);
        st.init_from(w, agg_comm, static_cast<int>(remap.size()));
    }

    std::vector<int> labels(static_cast<std::size_t>(n_orig));
    for (int v = 0; v < n_orig; ++v)
        labels[static_cast<std::size_t>(v)] =
            st.comm[static_cast<std::size_t>(flat[static_cast<std::size_t>(v)])];

    split_disconnected(graphs, labels);
    relabel_contiguous(labels, nullptr);
    return labels;
}

}  // namespace

std::vector<int> leiden_labels(const WeightedGraph& graph, double resolution, std::uint64_t seed) {
    return run_leiden({&graph}, {1.0}, resolution, seed);
}

Partition leiden(const WeightedGraph& graph, double resolution, std::uint64_t seed,
                 ClusterMode mode) {
    Partition p;
    p.mode = mode;
    p.seed = seed;
    p.assignment = leiden_labels(graph, resolution, seed);
    relabel_contiguous(p);
    p.num_params["resolution"] = resolution;
    // Optimization runs at the requested resolution; the reported quality is
    // standard modularity so values stay comparable across resolutions.
    p.quality.modularity = modularity(graph, p.assignment, 1.0);
    p.quality.coverage = coverage_of(p.assignment);
    return p;
}

TuneResult tune_resolution(const WeightedGraph& graph, std::vector<double> resolutions,
                           double target_modularity, std::uint64_t seed, int min_community_size,
                           ClusterMode mode) {
    if (resolutions.empty()) resolutions = default_resolutions();
    std::sort(resolutions.begin(), resolutions.end());

    TuneResult result;
    std::vector<Partition> parts;
    parts.reserve(resolutions.size());
    int best = -1;
    for (std::size_t i = 0; i < resolutions.size(); ++i) {
        Partition p = leiden(graph, resolutions[i], seed, mode);
        result.runs.push_back({resolutions[i], p.quality.modularity.value_or(0.0), p.cluster_count});
        parts.push_back(std::move(p));
        if (best < 0 ||
            result.runs[static_cast<std::size_t>(best)].modularity_value < result.runs[i].modularity_value)
            best = static_cast<int>(i);
        if (result.runs[i].modularity_value >= target_modularity) {
            result.resolution = resolutions[i];
            result.partition = std::move(parts[i]);
            result.target_met = true;
            break;
        }
    }
    if (!result.target_met) {
        result.resolution = resolutions[static_cast<std::size_t>(best)];
        result.partition = std::move(parts[static_cast<std::size_t>(best)]);
        result.partition.flags.push_back("target_modularity_missed");
    }
    apply_min_community_size(result.partition, min_community_size);
    result.partition.num_params["min_community_size"] = min_community_size;
    result.partition.num_params["target_modularity"] = target_modularity;
    return result;
}

Partition multiplex_leiden(const MultiplexGraph& layers, std::pair<double, double> layer_weights,
                           double resolution, std::uint64_t seed, int min_community_size) {
    std::vector<const WeightedGraph*> graphs;
    std::vector<double> alphas;
    std::vector<double> given{layer_weights.first, layer_weights.second};
    for (std::size_t l = 0; l < layers.layers.size(); ++l) {
        double a = l < given.size() ? given[l] : 1.0;
        if (a == 0.0 || layers.layers[l].edges.empty()) continue;
        graphs.push_back(&layers.layers[l]);
        alphas.push_back(a);
    }

    Partition p;
    p.mode = ClusterMode::multiplex;
    p.seed = seed;
    p.num_params["resolution"] = resolution;
    p.num_params["w_semantic"] = layer_weights.first;
    p.num_params["w_ownership"] = layer_weights.second;
    p.num_params["min_community_size"] = min_community_size;

    if (graphs.empty()) {
        p.assignment.assign(static_cast<std::size_t>(layers.node_count), kNoise);
        p.cluster_count = 0;
        p.quality.coverage = coverage_of(p.assignment);
        return p;
    }

    p.assignment = run_leiden(graphs, alphas, resolution, seed);

    // Nodes without any edge in any active layer carry no signal.
    std::vector<bool> isolated(static_cast<std::size_t>(layers.node_count), true);
    for (const auto* g : graphs) {
        for (const auto& e : g->edges) {
            isolated[static_cast<std::size_t>(e.u)] = false;
            isolated[static_cast<std::size_t>(e.v)] = false;
        }
    }
    for (std::size_t v = 0; v < isolated.size(); ++v)
        if (isolated[v]) p.assignment[v] = kNoise;

    relabel_contiguous(p);
    MultiplexGraph active;
    active.node_count = layers.node_count;
    for (const auto* g : graphs) active.layers.push_back(*g);
    double alpha_sum = 0.0;
    for (double a : alphas) alpha_sum += a;
    p.quality.modularity =
        multiplex_modularity(active, p.assignment, alphas, 1.0) / std::max(alpha_sum, 1e-300);
    apply_min_community_size(p, min_community_size);
    return p;
}

}  // namespace loghint
