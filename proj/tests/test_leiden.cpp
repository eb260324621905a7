#include <doctest.h>

#include <map>
#include <set>

#include "loghint/cluster_metrics.hpp"
#include "loghint/leiden.hpp"
#include "loghint/metrics.hpp"
#include "loghint/rng.hpp"

using namespace loghint;

namespace {

WeightedGraph clique_pair() {
    // two 5-cliques joined by a single edge (0..4, 5..9, bridge 0-5)
    WeightedGraph g;
    g.node_count = 10;
    for (int base : {0, 5})
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) g.edges.push_back({base + i, base + j, 1.0});
    g.edges.push_back({0, 5, 1.0});
    return g;
}

WeightedGraph ring_of_cliques(int cliques, int size) {
    WeightedGraph g;
    g.node_count = cliques * size;
    for (int c = 0; c < cliques; ++c) {
        int base = c * size;
        for (int i = 0; i < size; ++i)
            for (int j = i + 1; j < size; ++j) g.edges.push_back({base + i, base + j, 1.0});
        int next = ((c + 1) % cliques) * size;
        int u = std::min(base, next), v = std::max(base, next);
        g.edges.push_back({u, v, 1.0});
    }
    return g;
}

WeightedGraph erdos_renyi(int n, double p, std::uint64_t seed) {
    Rng rng(seed);
    WeightedGraph g;
    g.node_count = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) g.edges.push_back({i, j, 0.5 + rng.uniform()});
    return g;
}

std::vector<std::set<int>> communities_of(const std::vector<int>& labels) {
    std::map<int, std::set<int>> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != kNoise) by_label[labels[i]].insert(static_cast<int>(i));
    std::vector<std::set<int>> out;
    for (auto& [_, members] : by_label) out.push_back(std::move(members));
    return out;
}

bool community_connected(const WeightedGraph& g, const std::set<int>& members) {
    if (members.empty()) return true;
    auto adjacency = g.adjacency();
    std::set<int> seen;
    std::vector<int> stack{*members.begin()};
    seen.insert(*members.begin());
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (auto [u, w] : adjacency[static_cast<std::size_t>(v)]) {
            (void)w;
            if (members.count(u) && !seen.count(u)) {
                seen.insert(u);
                stack.push_back(u);
            }
        }
    }
    return seen.size() == members.size();
}

}  // namespace

TEST_CASE("two cliques joined by one edge: brute force confirms and leiden finds it") {
    WeightedGraph g = clique_pair();

    // brute-force modularity over all 2^9 bipartitions (node 0 fixed to side 0)
    double best = -2.0;
    std::vector<int> best_labels;
    for (int mask = 0; mask < (1 << 9); ++mask) {
        std::vector<int> labels(10, 0);
        for (int i = 1; i < 10; ++i)
            if (mask & (1 << (i - 1))) labels[static_cast<std::size_t>(i)] = 1;
        double q = modularity(g, labels, 1.0);
        if (q > best) {
            best = q;
            best_labels = labels;
        }
    }
    // the optimum is the two cliques
    for (int i = 0; i < 5; ++i) CHECK(best_labels[static_cast<std::size_t>(i)] == best_labels[0]);
    for (int i = 5; i < 10; ++i) CHECK(best_labels[static_cast<std::size_t>(i)] == best_labels[5]);
    CHECK(best_labels[0] != best_labels[5]);

    Partition p = leiden(g, 1.0, 7);
    REQUIRE(p.cluster_count == 2);
    auto communities = communities_of(p.assignment);
    std::set<int> left{0, 1, 2, 3, 4}, right{5, 6, 7, 8, 9};
    CHECK(((communities[0] == left && communities[1] == right) ||
           (communities[0] == right && communities[1] == left)));
    CHECK(*p.quality.modularity == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("edgeless graph: every node its own community") {
    WeightedGraph g;
    g.node_count = 6;
    Partition p = leiden(g, 1.0, 1);
    CHECK(p.cluster_count == 6);
    std::set<int> distinct(p.assignment.begin(), p.assignment.end());
    CHECK(distinct.size() == 6);
}

TEST_CASE("ring of four 5-cliques") {
    WeightedGraph g = ring_of_cliques(4, 5);
    Partition p = leiden(g, 1.0, 3);
    CHECK(p.cluster_count == 4);
    CHECK(*p.quality.modularity > 0.6);
    // closed form for the planted partition
    double planted = 4.0 * (10.0 / 44.0 - (22.0 / 88.0) * (22.0 / 88.0));
    CHECK(*p.quality.modularity == doctest::Approx(planted).epsilon(1e-9));
}

TEST_CASE("output modularity never below the singleton partition") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        WeightedGraph g = erdos_renyi(40, 0.15, 900 + seed);
        Partition p = leiden(g, 1.0, seed);
        std::vector<int> singletons(40);
        for (int i = 0; i < 40; ++i) singletons[static_cast<std::size_t>(i)] = i;
        CAPTURE(seed);
        CHECK(*p.quality.modularity >= modularity(g, singletons, 1.0) - 1e-12);
    }
}

TEST_CASE("every community induces a connected subgraph") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        WeightedGraph g = erdos_renyi(50, 0.08, 1700 + seed);
        Partition p = leiden(g, 1.0, seed);
        CAPTURE(seed);
        for (const auto& members : communities_of(p.assignment))
            CHECK(community_connected(g, members));
    }
}

TEST_CASE("determinism: same seed, same partition") {
    WeightedGraph g = erdos_renyi(60, 0.1, 42);
    Partition a = leiden(g, 1.0, 5);
    Partition b = leiden(g, 1.0, 5);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("tune_resolution") {
    SUBCASE("planted ring meets the target at the smallest listed resolution") {
        WeightedGraph g = ring_of_cliques(4, 12);  // communities of 12 >= min size
        TuneResult r = tune_resolution(g, {}, 0.7, 3, 10, ClusterMode::ownership);
        CHECK(r.target_met);
        CHECK(r.resolution == doctest::Approx(0.5));
        CHECK(r.partition.cluster_count == 4);
        CHECK_FALSE(r.partition.has_flag("target_modularity_missed"));
    }
    SUBCASE("unreachable target falls back to the max-modularity run, flagged") {
        WeightedGraph g = erdos_renyi(60, 0.5, 77);  // dense random: low modularity
        TuneResult r = tune_resolution(g, {}, 0.7, 3, 1, ClusterMode::ownership);
        CHECK_FALSE(r.target_met);
        CHECK(r.partition.has_flag("target_modularity_missed"));
        double best = 0.0;
        for (const auto& run : r.runs) best = std::max(best, run.modularity_value);
        CHECK(*r.partition.quality.modularity == doctest::Approx(best));
    }
    SUBCASE("communities under the minimum size become noise") {
        // four cliques of 12 and one clique of 6, all disconnected
        WeightedGraph g = ring_of_cliques(4, 12);
        int base = g.node_count;
        g.node_count += 6;
        for (int i = 0; i < 6; ++i)
            for (int j = i + 1; j < 6; ++j) g.edges.push_back({base + i, base + j, 1.0});
        TuneResult r = tune_resolution(g, {}, 0.7, 3, 10, ClusterMode::ownership);
        for (int i = 0; i < 6; ++i)
            CHECK(r.partition.assignment[static_cast<std::size_t>(base + i)] == kNoise);
        CHECK(r.partition.cluster_count == 4);
        CHECK(r.partition.quality.coverage == doctest::Approx(48.0 / 54.0));
    }
}

namespace {

/// Two agreeing planted layers with a fraction of cross-block noise edges.
MultiplexGraph planted_multiplex(int blocks, int block_size, double noise_fraction,
                                 std::uint64_t seed) {
    Rng rng(seed);
    MultiplexGraph mg;
    mg.node_count = blocks * block_size;
    for (int layer = 0; layer < 2; ++layer) {
        WeightedGraph g;
        g.node_count = mg.node_count;
        for (int b = 0; b < blocks; ++b) {
            int base = b * block_size;
            for (int i = 0; i < block_size; ++i)
                for (int j = i + 1; j < block_size; ++j)
                    if (rng.uniform() < 0.6) g.edges.push_back({base + i, base + j, 0.5 + rng.uniform()});
        }
        std::size_t block_edges = g.edges.size();
        std::size_t want_noise = static_cast<std::size_t>(noise_fraction * block_edges);
        std::size_t added = 0;
        while (added < want_noise) {
            int u = static_cast<int>(rng.below(static_cast<std::size_t>(mg.node_count)));
            int v = static_cast<int>(rng.below(static_cast<std::size_t>(mg.node_count)));
            if (u == v || u / block_size == v / block_size) continue;
            g.edges.push_back({std::min(u, v), std::max(u, v), 0.5 + rng.uniform()});
            ++added;
        }
        mg.layers.push_back(std::move(g));
    }
    return mg;
}

}  // namespace

TEST_CASE("multiplex leiden") {
    SUBCASE("identical layers equal single-layer leiden") {
        WeightedGraph g = ring_of_cliques(4, 12);
        MultiplexGraph mg;
        mg.node_count = g.node_count;
        mg.layers = {g, g};
        Partition multi = multiplex_leiden(mg, {1.0, 1.0}, 1.0, 9, 1);
        Partition single = leiden(g, 1.0, 9);
        CHECK(adjusted_rand_index(multi.assignment, single.assignment) == doctest::Approx(1.0));
    }
    SUBCASE("weight (1,0) reduces exactly to layer 1") {
        MultiplexGraph mg = planted_multiplex(4, 12, 0.10, 31);
        Partition multi = multiplex_leiden(mg, {1.0, 0.0}, 1.0, 4, 1);
        Partition single = leiden(mg.layers[0], 1.0, 4);
        CHECK(adjusted_rand_index(multi.assignment, single.assignment) == doctest::Approx(1.0));
    }
    SUBCASE("edgeless second layer recovers the planted layer-1 partition") {
        WeightedGraph g = ring_of_cliques(4, 12);
        MultiplexGraph mg;
        mg.node_count = g.node_count;
        WeightedGraph empty;
        empty.node_count = g.node_count;
        mg.layers = {g, empty};
        Partition multi = multiplex_leiden(mg, {1.0, 1.0}, 1.0, 2, 10);
        std::vector<int> planted(static_cast<std::size_t>(g.node_count));
        for (int i = 0; i < g.node_count; ++i) planted[static_cast<std::size_t>(i)] = i / 12;
        CHECK(adjusted_rand_index(multi.assignment, planted) == doctest::Approx(1.0));
    }
    SUBCASE("two agreeing planted layers with noise: ARI >= 0.9 across seeds") {
        std::vector<int> planted(4 * 16);
        for (int i = 0; i < 64; ++i) planted[static_cast<std::size_t>(i)] = i / 16;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            MultiplexGraph mg = planted_multiplex(4, 16, 0.05, 100 + seed);
            Partition p = multiplex_leiden(mg, {1.0, 1.0}, 1.0, seed, 10);
            CAPTURE(seed);
            CHECK(adjusted_rand_index(p.assignment, planted) >= 0.9);
        }
    }
    SUBCASE("nodes isolated in both layers are noise") {
        WeightedGraph g = ring_of_cliques(2, 12);
        MultiplexGraph mg;
        mg.node_count = g.node_count + 2;  // two isolated nodes
        WeightedGraph l1 = g, l2 = g;
        l1.node_count = mg.node_count;
        l2.node_count = mg.node_count;
        mg.layers = {l1, l2};
        Partition p = multiplex_leiden(mg, {1.0, 1.0}, 1.0, 5, 10);
        CHECK(p.assignment[static_cast<std::size_t>(g.node_count)] == kNoise);
        CHECK(p.assignment[static_cast<std::size_t>(g.node_count + 1)] == kNoise);
        CHECK(p.cluster_count == 2);
    }
    SUBCASE("empty multiplex yields all noise") {
        MultiplexGraph mg;
        mg.node_count = 4;
        Partition p = multiplex_leiden(mg, {1.0, 1.0}, 1.0, 1, 10);
        for (int l : p.assignment) CHECK(l == kNoise);
    }
}
