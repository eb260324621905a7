#include <benchmark/benchmark.h>

#include "loghint/graph.hpp"
#include "loghint/hdbscan.hpp"
#include "loghint/leiden.hpp"
#include "loghint/rng.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace loghint;

WeightedGraph ring_of_cliques(int cliques, int size) {
    WeightedGraph g;
    g.node_count = cliques * size;
    for (int c = 0; c < cliques; ++c) {
        int base = c * size;
        for (int i = 0; i < size; ++i)
            for (int j = i + 1; j < size; ++j) g.edges.push_back({base + i, base + j, 1.0});
        int next = ((c + 1) % cliques) * size;
        g.edges.push_back({std::min(base, next), std::max(base, next), 1.0});
    }
    return g;
}

void BM_Leiden(benchmark::State& state) {
    WeightedGraph g = ring_of_cliques(static_cast<int>(state.range(0)), 10);
    for (auto _ : state) {
        auto labels = leiden_labels(g, 1.0, 3);
        benchmark::DoNotOptimize(labels);
    }
}
BENCHMARK(BM_Leiden)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Hdbscan(benchmark::State& state) {
    std::vector<std::vector<double>> centers = {{0, 0, 0, 0, 0},
                                                {20, 0, 0, 0, 0},
                                                {0, 20, 0, 0, 0}};
    auto blobs = testsupport::make_blobs(centers, static_cast<int>(state.range(0)) / 3, 0.5, 5);
    for (auto _ : state) {
        auto result = hdbscan(blobs.points, 25, 12);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_Hdbscan)->Arg(300)->Arg(900)->Unit(benchmark::kMillisecond);

void BM_KnnLayer(benchmark::State& state) {
    auto fx = testsupport::make_index_fixture(static_cast<int>(state.range(0)), 1, 20, 128, 3);
    for (auto _ : state) {
        auto layer = build_layer(fx.embeddings.vectors, 20);
        benchmark::DoNotOptimize(layer);
    }
}
BENCHMARK(BM_KnnLayer)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
