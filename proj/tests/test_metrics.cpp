#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "loghint/cluster_metrics.hpp"
#include "loghint/metrics.hpp"
#include "loghint/partition.hpp"
#include "loghint/rng.hpp"
#include "support/oracles.hpp"

using namespace loghint;


TEST_CASE("ari examples") {
    std::vector<int> a{0, 0, 1, 1}, b{1, 1, 0, 0};
    CHECK(adjusted_rand_index(a, a) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(1.0));  // label permutation
    std::vector<int> p{1, 1, 2, 2}, q{1, 2, 1, 2};
    CHECK(adjusted_rand_index(p, q) == doctest::Approx(-0.5).epsilon(1e-12));
    std::vector<int> single(6, 0);
    CHECK(adjusted_rand_index(single, single) == 1.0);  // degenerate convention
}

TEST_CASE("ari matches the pair-counting oracle on 30 random instances") {
    Rng rng(101);
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 2 + rng.below(9);
        std::vector<int> a(n), b(n);
        for (auto& x : a) x = static_cast<int>(rng.below(4));
        for (auto& x : b) x = static_cast<int>(rng.below(4));
        CAPTURE(t);
        CHECK(adjusted_rand_index(a, b) == doctest::Approx(oracle::ari(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("auc examples") {
    // perfect one-hot scores
    std::vector<std::vector<double>> perfect{{1, 0}, {0, 1}, {1, 0}};
    std::vector<int> labels{0, 1, 0};
    CHECK(*auc_multiclass(perfect, labels) == doctest::Approx(1.0));

    // scores independent of labels
    std::vector<std::vector<double>> flat(4, {0.5, 0.5});
    std::vector<int> l2{0, 1, 0, 1};
    CHECK(*auc_multiclass(flat, l2) == doctest::Approx(0.5));

    // single class undefined
    std::vector<int> mono{1, 1, 1};
    CHECK_FALSE(auc_multiclass(flat, mono).has_value());

    // hand 6-record instance vs the pairwise oracle
    std::vector<std::vector<double>> scores{{0.7, 0.2, 0.1}, {0.1, 0.6, 0.3}, {0.3, 0.3, 0.4},
                                            {0.5, 0.4, 0.1}, {0.2, 0.2, 0.6}, {0.4, 0.4, 0.2}};
    std::vector<int> l3{0, 1, 2, 1, 2, 0};
    CHECK(*auc_multiclass(scores, l3) ==
          doctest::Approx(oracle::auc(scores, l3)).epsilon(1e-9));
}

TEST_CASE("auc matches the oracle on 30 random instances") {
    Rng rng(202);
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 4 + rng.below(7);
        int classes = 2 + static_cast<int>(rng.below(3));
        std::vector<int> labels(n);
        std::vector<std::vector<double>> scores(n, std::vector<double>(static_cast<std::size_t>(classes)));
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.below(static_cast<std::size_t>(classes)));
            double total = 0;
            for (auto& s : scores[i]) {
                s = rng.below(5) * 0.25;  // coarse grid provokes ties
                total += s;
            }
            if (total > 0)
                for (auto& s : scores[i]) s /= total;
        }
        auto got = auc_multiclass(scores, labels);
        double want = oracle::auc(scores, labels);
        CAPTURE(t);
        if (std::isnan(want)) {
            CHECK_FALSE(got.has_value());
        } else {
            REQUIRE(got.has_value());
            CHECK(*got == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
    Rng rng(203);
    std::size_t n = 10;
    std::vector<int> labels(n);
    std::vector<std::vector<double>> scores(n, std::vector<double>(3));
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<int>(rng.below(3));
        for (auto& s : scores[i]) s = rng.uniform();
    }
    auto transformed = scores;
    for (auto& row : transformed)
        for (auto& s : row) s = s * s * s + 2.0;  // strictly monotone
    CHECK(*auc_multiclass(scores, labels) ==
          doctest::Approx(*auc_multiclass(transformed, labels)).epsilon(1e-12));
}

TEST_CASE("precision examples and permutation invariance") {
    std::vector<int> t{1, 2, 3, 4, 5};
    CHECK(precision_exact(t, t) == 1.0);
    std::vector<int> wrong{2, 3, 4, 5, 1};
    CHECK(precision_exact(wrong, t) == 0.0);
    std::vector<int> mixed{1, 2, 3, 5, 4};
    CHECK(precision_exact(mixed, t) == doctest::Approx(0.6));

    Rng rng(301);
    std::vector<int> pred(8), truth(8);
    for (auto& x : pred) x = static_cast<int>(rng.below(4));
    for (auto& x : truth) x = static_cast<int>(rng.below(4));
    double before = precision_exact(pred, truth);
    // permute both in lockstep
    std::vector<std::size_t> order{7, 3, 1, 0, 2, 6, 5, 4};
    std::vector<int> p2, t2;
    for (auto i : order) {
        p2.push_back(pred[i]);
        t2.push_back(truth[i]);
    }
    CHECK(precision_exact(p2, t2) == doctest::Approx(before));
}

TEST_CASE("aod examples on the five-level scale") {
    LevelScale five{{"debug", "info", "warn", "error", "fatal"}};
    // true=debug(0), pred=error(3): 1 - 3/4
    std::vector<int> pred{3}, truth{0};
    CHECK(average_ordinal_distance(pred, truth, five) == doctest::Approx(0.25).epsilon(1e-12));
    // true=warn(2) maxdist 2, pred=fatal(4): 1 - 2/2 = 0
    pred = {4};
    truth = {2};
    CHECK(average_ordinal_distance(pred, truth, five) == doctest::Approx(0.0).epsilon(1e-12));
    // exact predictions
    pred = {0, 1, 2};
    truth = {0, 1, 2};
    CHECK(average_ordinal_distance(pred, truth, five) == doctest::Approx(1.0));
}

TEST_CASE("precision and aod match oracles on 30 random instances") {
    Rng rng(302);
    LevelScale scale = LevelScale::default_scale();
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 1 + rng.below(10);
        std::vector<int> pred(n), truth(n);
        for (auto& x : pred) x = static_cast<int>(rng.below(scale.size()));
        for (auto& x : truth) x = static_cast<int>(rng.below(scale.size()));
        CAPTURE(t);
        CHECK(precision_exact(pred, truth) ==
              doctest::Approx(oracle::precision(pred, truth)).epsilon(1e-9));
        CHECK(average_ordinal_distance(pred, truth, scale) ==
              doctest::Approx(oracle::aod(pred, truth, 6)).epsilon(1e-9));
    }
}

TEST_CASE("silhouette and dbi on the hand instance") {
    std::vector<std::vector<double>> pts{{0, 0}, {0, 1}, {10, 0}, {10, 1}};
    std::vector<int> labels{0, 0, 1, 1};
    auto sil = silhouette_score(pts, labels);
    auto db = davies_bouldin_index(pts, labels);
    REQUIRE(sil);
    REQUIRE(db);
    CHECK(*sil == doctest::Approx(oracle::silhouette(pts, labels)).epsilon(1e-9));
    CHECK(*db == doctest::Approx(oracle::dbi(pts, labels)).epsilon(1e-9));
    CHECK(*sil > 0.85);  // tight and far apart
    CHECK(*db < 0.15);

    // single cluster: undefined, not zero
    std::vector<int> one{0, 0, 0, 0};
    CHECK_FALSE(silhouette_score(pts, one).has_value());
    CHECK_FALSE(davies_bouldin_index(pts, one).has_value());
    CHECK_FALSE(dbcv_score(pts, one).has_value());
}

TEST_CASE("silhouette and dbi match oracles on 25 random instances") {
    Rng rng(404);
    int done = 0;
    while (done < 25) {
        std::size_t n = 4 + rng.below(7);
        std::vector<std::vector<double>> pts;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            pts.push_back({rng.uniform() * 4, rng.uniform() * 4});
            labels.push_back(static_cast<int>(rng.below(3)) - (rng.below(5) == 0 ? 1 : 0));
        }
        std::set<int> classes;
        for (int l : labels)
            if (l >= 0) classes.insert(l);
        if (classes.size() < 2) continue;
        // at least one real pair per metric definition is fine either way
        auto sil = silhouette_score(pts, labels);
        auto db = davies_bouldin_index(pts, labels);
        REQUIRE(sil);
        REQUIRE(db);
        CAPTURE(done);
        CHECK(*sil == doctest::Approx(oracle::silhouette(pts, labels)).epsilon(1e-9));
        CHECK(*db == doctest::Approx(oracle::dbi(pts, labels)).epsilon(1e-9));
        ++done;
    }
}

TEST_CASE("dbcv separates clean structure from smeared structure") {
    // two tight, distant blobs: strongly positive
    std::vector<std::vector<double>> good;
    std::vector<int> labels;
    Rng rng(77);
    for (int i = 0; i < 12; ++i) {
        good.push_back({rng.normal() * 0.05, rng.normal() * 0.05});
        labels.push_back(0);
    }
    for (int i = 0; i < 12; ++i) {
        good.push_back({8 + rng.normal() * 0.05, rng.normal() * 0.05});
        labels.push_back(1);
    }
    auto strong = dbcv_score(good, labels);
    REQUIRE(strong);
    CHECK(*strong > 0.5);

    // same labels on one smeared cloud: far lower validity
    std::vector<std::vector<double>> smeared;
    for (int i = 0; i < 24; ++i) smeared.push_back({rng.uniform() * 2, rng.uniform() * 2});
    auto weak = dbcv_score(smeared, labels);
    REQUIRE(weak);
    CHECK(*weak < *strong - 0.5);

    // noise stays in the weight denominator
    std::vector<int> with_noise = labels;
    with_noise[0] = kNoise;
    auto discounted = dbcv_score(good, with_noise);
    REQUIRE(discounted);
    CHECK(*discounted < *strong);
}

TEST_CASE("wilcoxon p matches exact enumeration, n <= 10") {
    Rng rng(505);
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 2 + rng.below(9);
        std::vector<double> diffs(n);
        for (auto& d : diffs) d = (static_cast<double>(rng.below(9)) - 4.0) / 2.0;  // ties + zeros
        CAPTURE(t);
        CHECK(wilcoxon_signed_rank_p(diffs) ==
              doctest::Approx(oracle::wilcoxon_exact(diffs)).epsilon(1e-9));
    }
}

TEST_CASE("wilcoxon n=8 hand instance matches the 2^8 enumeration") {
    std::vector<double> a{5.1, 4.8, 6.2, 5.9, 5.5, 6.0, 5.2, 5.8};
    std::vector<double> b{4.9, 4.9, 5.6, 5.0, 5.1, 5.7, 4.8, 5.1};
    std::vector<double> diffs(8);
    for (std::size_t i = 0; i < 8; ++i) diffs[i] = a[i] - b[i];
    double p = wilcoxon_signed_rank_p(diffs);
    CHECK(p == doctest::Approx(oracle::wilcoxon_exact(diffs)).epsilon(1e-9));
    // one negative difference of rank 1: W- = 1, two-sided p = 2*P(W <= 1)
    // = 2 * 2/256 (the empty pattern and {rank 1}) = 0.015625
    CHECK(p == doctest::Approx(0.015625).epsilon(1e-9));
}

TEST_CASE("paired comparison") {
    SUBCASE("identical series") {
        std::vector<double> a{1, 2, 3, 4};
        auto r = paired_comparison(a, a);
        CHECK(r.p_value == doctest::Approx(1.0));
        CHECK(r.cohens_d == 0.0);
        CHECK(r.effect_label == "negligible");
    }
    SUBCASE("constant shift has zero-sd differences") {
        std::vector<double> b{1, 2, 3, 4, 5, 6};
        std::vector<double> a;
        for (double x : b) a.push_back(x + 1.0);
        auto r = paired_comparison(a, b);
        CHECK(std::isinf(r.cohens_d));
        CHECK(r.cohens_d > 0);
        CHECK(r.effect_label == "large");
        // all-positive sign pattern: p = 2/2^6
        CHECK(r.p_value == doctest::Approx(2.0 / 64.0).epsilon(1e-9));
    }
    SUBCASE("cohens d matches the oracle on random instances") {
        Rng rng(606);
        for (int t = 0; t < 25; ++t) {
            std::size_t n = 3 + rng.below(8);
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = rng.uniform();
                b[i] = rng.uniform();
            }
            auto r = paired_comparison(a, b);
            double want = oracle::cohens_d(a, b);
            CAPTURE(t);
            CHECK(r.cohens_d == doctest::Approx(want).epsilon(1e-9));
        }
    }
    SUBCASE("effect size labels at the thresholds") {
        CHECK(effect_size_label(0.1) == "negligible");
        CHECK(effect_size_label(0.2) == "small");
        CHECK(effect_size_label(-0.49) == "small");
        CHECK(effect_size_label(0.5) == "medium");
        CHECK(effect_size_label(0.79) == "medium");
        CHECK(effect_size_label(0.8) == "large");
        CHECK(effect_size_label(-3.0) == "large");
    }
}

TEST_CASE("normal-approximation path stays sane for larger n") {
    Rng rng(707);
    std::vector<double> a(200), b(200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        b[i] = rng.uniform();
        a[i] = b[i] + 0.3 + 0.05 * rng.normal();  // clearly shifted
    }
    auto r = paired_comparison(a, b);
    CHECK(r.p_value < 1e-6);
    CHECK(r.cohens_d > 0.8);

    // and a null: no systematic shift
    for (std::size_t i = 0; i < a.size(); ++i) {
        b[i] = rng.uniform();
        a[i] = rng.uniform();
    }
    auto null = paired_comparison(a, b);
    CHECK(null.p_value > 0.001);
}

TEST_CASE("modularity on known partitions") {
    // ring of 4 cliques of 5: closed form 4*(10/44 - (22/88)^2)
    WeightedGraph g;
    g.node_count = 20;
    for (int c = 0; c < 4; ++c) {
        int base = c * 5;
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) g.edges.push_back({base + i, base + j, 1.0});
    }
    g.edges.push_back({0, 5, 1.0});
    g.edges.push_back({5, 10, 1.0});
    g.edges.push_back({10, 15, 1.0});
    g.edges.push_back({0, 15, 1.0});

    std::vector<int> planted(20);
    for (int i = 0; i < 20; ++i) planted[static_cast<std::size_t>(i)] = i / 5;
    double expect = 4.0 * (10.0 / 44.0 - (22.0 / 88.0) * (22.0 / 88.0));
    CHECK(modularity(g, planted, 1.0) == doctest::Approx(expect).epsilon(1e-12));

    // empty graph contributes zero
    WeightedGraph empty;
    empty.node_count = 3;
    std::vector<int> single{0, 0, 0};
    CHECK(modularity(empty, single, 1.0) == 0.0);

    // multiplex sum with weights
    MultiplexGraph mg;
    mg.node_count = 20;
    mg.layers = {g, g};
    std::vector<double> w{1.0, 0.5};
    CHECK(multiplex_modularity(mg, planted, w, 1.0) ==
          doctest::Approx(1.5 * expect).epsilon(1e-12));
}

TEST_CASE("intra/inter cosine conventions") {
    // two clusters with known pairwise similarities
    std::vector<std::vector<double>> vecs{{1, 0}, {1, 0}, {0, 1}, {0, 1}};
    std::vector<int> labels{0, 0, 1, 1};
    auto sim = [&](int a, int b) {
        double dot = 0;
        for (int d = 0; d < 2; ++d)
            dot += vecs[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)] *
                   vecs[static_cast<std::size_t>(b)][static_cast<std::size_t>(d)];
        return dot;
    };
    auto r = intra_inter_cosine(sim, labels);
    REQUIRE(r.intra_global);
    REQUIRE(r.inter_global);
    CHECK(*r.intra_global == doctest::Approx(1.0));
    CHECK(*r.intra_per_cluster == doctest::Approx(1.0));
    CHECK(*r.inter_global == doctest::Approx(0.0));
    CHECK(*r.inter_per_pair == doctest::Approx(0.0));
}
