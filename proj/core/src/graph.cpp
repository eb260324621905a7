#include "loghint/graph.hpp"

#include <algorithm>
#include <cmath>

#include "loghint/ownership.hpp"
#include "loghint/parallel.hpp"

namespace loghint {

double WeightedGraph::total_weight() const {
    double sum = 0.0;
    for (const auto& e : edges) sum += e.w;
    return sum;
}

std::vector<double> WeightedGraph::weighted_degrees() const {
    std::vector<double> deg(static_cast<std::size_t>(node_count), 0.0);
    for (const auto& e : edges) {
        deg[static_cast<std::size_t>(e.u)] += e.w;
        deg[static_cast<std::size_t>(e.v)] += e.w;
    }
    return deg;
}

std::vector<std::vector<std::pair<int, double>>> WeightedGraph::adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(node_count));
    for (const auto& e : edges) {
        adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.w);
        adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.w);
    }
    return adj;
}

WeightedGraph knn_graph(int node_count, int k,
                        const std::function<double(int, int)>& similarity) {
    const std::size_t n = static_cast<std::size_t>(node_count);
    std::vector<std::vector<std::pair<int, double>>> top(n);

    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<int, double>> sims;
        sims.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double s = similarity(static_cast<int>(i), static_cast<int>(j));
            if (s > 0.0) sims.emplace_back(static_cast<int>(j), s);
        }
        std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), sims.size());
        std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(keep), sims.end(),
                          [](const auto& a, const auto& b) {
                              if (a.second != b.second) return a.second > b.second;
                              return a.first < b.first;
                          });
        sims.resize(keep);
        top[i] = std::move(sims);
    });

    // Union symmetrization: keep an edge if either endpoint listed it.
    std::vector<WeightedEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [j, w] : top[i]) {
            int u = static_cast<int>(i), v = j;
            if (u > v) std::swap(u, v);
            edges.push_back({u, v, w});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const WeightedEdge& a, const WeightedEdge& b) {
                                return a.u == b.u && a.v == b.v;
                            }),
                edges.end());

    WeightedGraph g;
    g.node_count = node_count;
    g.edges = std::move(edges);
    return g;
}

void rescale_weights(WeightedGraph& g) {
    if (g.edges.empty()) return;
    double lo = g.edges.front().w, hi = g.edges.front().w;
    for (const auto& e : g.edges) {
        lo = std::min(lo, e.w);
        hi = std::max(hi, e.w);
    }
    if (hi <= lo) {
        for (auto& e : g.edges) e.w = 1.0;
        return;
    }
    double span = hi - lo;
    // The minimum edge rescales to weight 0 but stays in the layer; it still
    // counts for adjacency even though it adds nothing to modularity.
    for (auto& e : g.edges) e.w = (e.w - lo) / span;
}

WeightedGraph build_layer(const std::vector<std::vector<double>>& vectors, int k) {
    WeightedGraph g = knn_graph(static_cast<int>(vectors.size()), k, [&](int i, int j) {
        return cosine_similarity(vectors[static_cast<std::size_t>(i)],
                                 vectors[static_cast<std::size_t>(j)]);
    });
    rescale_weights(g);
    return g;
}

}  // namespace loghint
