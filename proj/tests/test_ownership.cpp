#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "loghint/graph.hpp"
#include "loghint/ownership.hpp"
#include "loghint/rng.hpp"

using namespace loghint;

namespace {

CommitRecord commit(const std::string& author, std::int64_t t,
                    std::vector<std::string> files) {
    CommitRecord c;
    c.commit_id = "x";
    c.author = author;
    c.timestamp = t;
    c.touched_files = std::move(files);
    return c;
}

constexpr std::int64_t kDay = 86400;
constexpr std::int64_t kRef = 2000000000;

double weight_of(const OwnershipMatrix& m, const std::string& file, const std::string& author) {
    for (std::size_t i = 0; i < m.files.size(); ++i) {
        if (m.files[i] != file) continue;
        for (std::size_t a = 0; a < m.authors.size(); ++a) {
            if (m.authors[a] != author) continue;
            for (const auto& [idx, w] : m.rows[i])
                if (idx == static_cast<int>(a)) return w;
            return 0.0;
        }
    }
    return 0.0;
}

}  // namespace

TEST_CASE("decay weights at the definition points") {
    DecayConfig decay;  // half life 365 days
    std::vector<std::string> files{"f"};

    SUBCASE("age equal to the half-life gives exactly 0.5") {
        std::vector<CommitRecord> commits{commit("a@x", kRef - 365 * kDay, {"f"})};
        auto m = build_ownership_matrix(commits, files, decay, kRef);
        CHECK(weight_of(m, "f", "a@x") == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("age zero gives exactly 1.0") {
        std::vector<CommitRecord> commits{commit("a@x", kRef, {"f"})};
        auto m = build_ownership_matrix(commits, files, decay, kRef);
        CHECK(weight_of(m, "f", "a@x") == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("three commits at 0/365/730 days sum to 1.75") {
        std::vector<CommitRecord> commits{
            commit("a@x", kRef, {"f"}),
            commit("a@x", kRef - 365 * kDay, {"f"}),
            commit("a@x", kRef - 730 * kDay, {"f"}),
        };
        auto m = build_ownership_matrix(commits, files, decay, kRef);
        CHECK(weight_of(m, "f", "a@x") == doctest::Approx(1.75).epsilon(1e-12));
    }
}

TEST_CASE("ten-commit fixture matches hand-computed weights") {
    struct Fix {
        const char* author;
        double age_days;
        const char* file;
    };
    const Fix fixture[] = {
        {"a@x", 0, "f1"},   {"a@x", 100, "f1"}, {"a@x", 365, "f2"}, {"b@x", 50, "f1"},
        {"b@x", 200, "f2"}, {"b@x", 400, "f2"}, {"c@x", 10, "f3"},  {"c@x", 730, "f3"},
        {"a@x", 1, "f3"},   {"b@x", 1000, "f3"},
    };
    std::vector<CommitRecord> commits;
    for (const auto& f : fixture)
        commits.push_back(commit(f.author, kRef - static_cast<std::int64_t>(f.age_days * kDay),
                                 {f.file}));
    std::vector<std::string> files{"f1", "f2", "f3"};
    auto m = build_ownership_matrix(commits, files, DecayConfig{365.0}, kRef);

    auto w = [](double age) { return std::pow(0.5, age / 365.0); };
    CHECK(weight_of(m, "f1", "a@x") == doctest::Approx(w(0) + w(100)).epsilon(1e-12));
    CHECK(weight_of(m, "f1", "b@x") == doctest::Approx(w(50)).epsilon(1e-12));
    CHECK(weight_of(m, "f2", "a@x") == doctest::Approx(w(365)).epsilon(1e-12));
    CHECK(weight_of(m, "f2", "b@x") == doctest::Approx(w(200) + w(400)).epsilon(1e-12));
    CHECK(weight_of(m, "f3", "c@x") == doctest::Approx(w(10) + w(730)).epsilon(1e-12));
    CHECK(weight_of(m, "f3", "a@x") == doctest::Approx(w(1)).epsilon(1e-12));
    CHECK(weight_of(m, "f3", "b@x") == doctest::Approx(w(1000)).epsilon(1e-12));
}

TEST_CASE("commits touching unknown files are counted, not fatal") {
    std::vector<CommitRecord> commits{commit("a@x", kRef, {"gone.java", "f"})};
    auto m = build_ownership_matrix(commits, {"f"}, DecayConfig{}, kRef);
    CHECK(m.ignored_paths == 1);
    CHECK(weight_of(m, "f", "a@x") == doctest::Approx(1.0));
}

TEST_CASE("file with no commits has an empty row") {
    std::vector<CommitRecord> commits{commit("a@x", kRef, {"f1"})};
    auto m = build_ownership_matrix(commits, {"f1", "f2"}, DecayConfig{}, kRef);
    CHECK(m.rows[1].empty());
}

TEST_CASE("decay monotonicity in the half-life") {
    Rng rng(11);
    std::vector<std::string> files{"f1", "f2", "f3", "f4"};
    std::vector<CommitRecord> commits;
    for (int i = 0; i < 40; ++i) {
        commits.push_back(commit("a" + std::to_string(rng.below(5)) + "@x",
                                 kRef - static_cast<std::int64_t>(rng.below(2000)) * kDay,
                                 {files[rng.below(files.size())]}));
    }
    auto short_hl = build_ownership_matrix(commits, files, DecayConfig{100.0}, kRef);
    auto long_hl = build_ownership_matrix(commits, files, DecayConfig{200.0}, kRef);
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::map<int, double> short_w(short_hl.rows[i].begin(), short_hl.rows[i].end());
        for (const auto& [a, w] : long_hl.rows[i]) CHECK(w >= short_w[a] - 1e-15);
    }
}

TEST_CASE("cosine similarity") {
    std::vector<double> u{1, 1, 0}, v{1, 0, 1}, z{0, 0, 0};
    CHECK(cosine_similarity(std::span<const double>(u), std::span<const double>(u)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine_similarity(std::span<const double>(u), std::span<const double>(v)) ==
          doctest::Approx(0.5).epsilon(1e-12));
    std::vector<double> a{1, 0, 0}, b{0, 2, 0};
    CHECK(cosine_similarity(std::span<const double>(a), std::span<const double>(b)) == 0.0);
    CHECK(cosine_similarity(std::span<const double>(z), std::span<const double>(u)) == 0.0);

    OwnershipRow su{{0, 1.0}, {1, 1.0}}, sv{{0, 1.0}, {2, 1.0}}, sz{};
    CHECK(cosine_similarity(su, sv) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cosine_similarity(sz, su) == 0.0);
}

TEST_CASE("knn graph on tiny fixtures") {
    SUBCASE("two identical rows, one edge of weight 1") {
        OwnershipMatrix m;
        m.files = {"f1", "f2"};
        m.authors = {"a"};
        m.rows = {{{0, 2.0}}, {{0, 4.0}}};
        WeightedGraph g = ownership_knn_graph(m, 20);
        REQUIRE(g.edges.size() == 1);
        CHECK(g.edges[0].u == 0);
        CHECK(g.edges[0].v == 1);
        CHECK(g.edges[0].w == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("orthogonal pairs drop, equal pair kept") {
        OwnershipMatrix m;  // f1 orthogonal to f2/f3; f2 == f3 up to scale
        m.files = {"f1", "f2", "f3"};
        m.authors = {"a", "b"};
        m.rows = {{{0, 1.0}}, {{1, 1.0}}, {{1, 3.0}}};
        WeightedGraph g = ownership_knn_graph(m, 20);
        REQUIRE(g.edges.size() == 1);
        CHECK(g.edges[0].u == 1);
        CHECK(g.edges[0].v == 2);
        CHECK(g.edges[0].w == doctest::Approx(1.0));
    }
}

namespace {

OwnershipMatrix random_matrix(int files, int authors, std::uint64_t seed) {
    Rng rng(seed);
    OwnershipMatrix m;
    for (int f = 0; f < files; ++f) m.files.push_back("f" + std::to_string(f));
    for (int a = 0; a < authors; ++a) m.authors.push_back("a" + std::to_string(a));
    m.rows.resize(static_cast<std::size_t>(files));
    for (auto& row : m.rows) {
        std::size_t max_nnz = std::min<std::size_t>(4, static_cast<std::size_t>(authors));
        std::size_t nnz = 1 + rng.below(max_nnz);
        std::set<int> picked;
        while (picked.size() < nnz)
            picked.insert(static_cast<int>(rng.below(static_cast<std::size_t>(authors))));
        for (int a : picked) row.emplace_back(a, 0.1 + rng.uniform());
    }
    return m;
}

}  // namespace

TEST_CASE("30-file graph agrees with brute-force top-k union") {
    OwnershipMatrix m = random_matrix(30, 8, 21);
    const int k = 20;
    WeightedGraph g = ownership_knn_graph(m, k);

    auto sim = [&](int i, int j) {
        return cosine_similarity(m.rows[static_cast<std::size_t>(i)],
                                 m.rows[static_cast<std::size_t>(j)]);
    };
    auto topk = [&](int i) {
        std::vector<std::pair<double, int>> all;
        for (int j = 0; j < 30; ++j) {
            if (j == i) continue;
            double s = sim(i, j);
            if (s > 0) all.emplace_back(s, j);
        }
        std::sort(all.begin(), all.end(), [](auto& a, auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        if (all.size() > static_cast<std::size_t>(k)) all.resize(static_cast<std::size_t>(k));
        std::set<int> out;
        for (auto& [_, j] : all) out.insert(j);
        return out;
    };
    std::vector<std::set<int>> tops;
    for (int i = 0; i < 30; ++i) tops.push_back(topk(i));

    std::set<std::pair<int, int>> expected;
    for (int i = 0; i < 30; ++i)
        for (int j : tops[static_cast<std::size_t>(i)])
            expected.insert({std::min(i, j), std::max(i, j)});

    std::set<std::pair<int, int>> got;
    for (const auto& e : g.edges) {
        got.insert({e.u, e.v});
        CHECK(e.w == doctest::Approx(sim(e.u, e.v)).epsilon(1e-12));
        CHECK(e.u < e.v);
    }
    CHECK(got == expected);
}

TEST_CASE("graph is scale invariant") {
    OwnershipMatrix m = random_matrix(20, 6, 5);
    OwnershipMatrix scaled = m;
    for (auto& row : scaled.rows)
        for (auto& [_, w] : row) w *= 3.7;
    WeightedGraph a = ownership_knn_graph(m, 5);
    WeightedGraph b = ownership_knn_graph(scaled, 5);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
        CHECK(a.edges[i].u == b.edges[i].u);
        CHECK(a.edges[i].v == b.edges[i].v);
        CHECK(a.edges[i].w == doctest::Approx(b.edges[i].w).epsilon(1e-12));
    }
}

TEST_CASE("fewer than k+1 files connects to all others; no duplicates") {
    OwnershipMatrix m = random_matrix(4, 3, 9);
    WeightedGraph g = ownership_knn_graph(m, 20);
    std::set<std::pair<int, int>> seen;
    for (const auto& e : g.edges) {
        CHECK(e.w > 0.0);
        CHECK(e.u != e.v);
        CHECK(seen.insert({e.u, e.v}).second);
    }
}

TEST_CASE("build_layer rescaling") {
    SUBCASE("stated example: {0.2, 0.6, 1.0} -> {0.0, 0.5, 1.0}") {
        WeightedGraph g;
        g.node_count = 4;
        g.edges = {{0, 1, 0.2}, {1, 2, 0.6}, {2, 3, 1.0}};
        rescale_weights(g);
        REQUIRE(g.edges.size() == 3);
        CHECK(g.edges[0].w == doctest::Approx(0.0));
        CHECK(g.edges[1].w == doctest::Approx(0.5));
        CHECK(g.edges[2].w == doctest::Approx(1.0));
    }
    SUBCASE("constant weights become all ones") {
        WeightedGraph g;
        g.node_count = 3;
        g.edges = {{0, 1, 0.4}, {1, 2, 0.4}};
        rescale_weights(g);
        for (const auto& e : g.edges) CHECK(e.w == 1.0);
    }
    SUBCASE("50 vectors match a brute-force knn + rescale oracle") {
        Rng rng(31);
        std::vector<std::vector<double>> vectors;
        for (int i = 0; i < 50; ++i) {
            std::vector<double> v(8);
            for (double& x : v) x = rng.uniform();
            vectors.push_back(std::move(v));
        }
        const int k = 6;
        WeightedGraph got = build_layer(vectors, k);

        std::map<std::pair<int, int>, double> weight;
        for (int i = 0; i < 50; ++i) {
            std::vector<std::pair<double, int>> sims;
            for (int j = 0; j < 50; ++j) {
                if (i == j) continue;
                double s = cosine_similarity(std::span<const double>(vectors[i]),
                                             std::span<const double>(vectors[j]));
                if (s > 0) sims.emplace_back(s, j);
            }
            std::sort(sims.begin(), sims.end(), [](auto& a, auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
            });
            for (int t = 0; t < k && t < static_cast<int>(sims.size()); ++t) {
                int j = sims[static_cast<std::size_t>(t)].second;
                weight[{std::min(i, j), std::max(i, j)}] =
                    sims[static_cast<std::size_t>(t)].first;
            }
        }
        double lo = 2.0, hi = -2.0;
        for (auto& [_, w] : weight) {
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
        REQUIRE(got.edges.size() == weight.size());
        for (const auto& e : got.edges) {
            auto it = weight.find({e.u, e.v});
            REQUIRE(it != weight.end());
            double expect = hi > lo ? (it->second - lo) / (hi - lo) : 1.0;
            CHECK(e.w == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}
