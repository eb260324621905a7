#include <benchmark/benchmark.h>

#include "loghint/retrieval.hpp"
#include "support/synthetic.hpp"

namespace {

using loghint::ClusterMode;
using loghint::RetrievalIndex;
using loghint::RetrievalQuery;

struct Fixture {
    loghint::testsupport::SyntheticIndexFixture data;
    RetrievalIndex index;

    explicit Fixture(int n_files)
        : data(loghint::testsupport::make_index_fixture(n_files, 2, 30, 256, 7)),
          index(RetrievalIndex::build(data.corpus, data.partitions, data.embeddings,
                                      data.ownership, 7)) {}
};

Fixture& fixture_15k() {
    static Fixture fx(15000);
    return fx;
}

void BM_RetrieveMultiplex(benchmark::State& state) {
    auto& fx = fixture_15k();
    const auto& statements = fx.data.corpus.statements;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& st = statements[(i * 7919) % statements.size()];
        auto result = fx.index.retrieve(RetrievalQuery{st.file, st.id}, ClusterMode::multiplex, 5);
        benchmark::DoNotOptimize(result);
        ++i;
    }
}
BENCHMARK(BM_RetrieveMultiplex)->Unit(benchmark::kMicrosecond);

void BM_RetrieveMultiplexAnn(benchmark::State& state) {
    auto& fx = fixture_15k();
    const auto& statements = fx.data.corpus.statements;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& st = statements[(i * 7919) % statements.size()];
        auto result =
            fx.index.retrieve(RetrievalQuery{st.file, st.id}, ClusterMode::multiplex, 5, true);
        benchmark::DoNotOptimize(result);
        ++i;
    }
}
BENCHMARK(BM_RetrieveMultiplexAnn)->Unit(benchmark::kMicrosecond);

void BM_RetrieveSemantic(benchmark::State& state) {
    auto& fx = fixture_15k();
    const auto& statements = fx.data.corpus.statements;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& st = statements[(i * 7919) % statements.size()];
        auto result = fx.index.retrieve(RetrievalQuery{st.file, st.id}, ClusterMode::semantic, 5);
        benchmark::DoNotOptimize(result);
        ++i;
    }
}
BENCHMARK(BM_RetrieveSemantic)->Unit(benchmark::kMicrosecond);

void BM_BuildIndex(benchmark::State& state) {
    auto data = loghint::testsupport::make_index_fixture(static_cast<int>(state.range(0)), 2, 30,
                                                         256, 11);
    for (auto _ : state) {
        auto index = RetrievalIndex::build(data.corpus, data.partitions, data.embeddings,
                                           data.ownership, 11);
        benchmark::DoNotOptimize(index);
    }
}
BENCHMARK(BM_BuildIndex)->Arg(1000)->Arg(15000)->Unit(benchmark::kMillisecond);

}  // namespace
