#include "loghint/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "loghint/cluster_metrics.hpp"
#include "loghint/metrics.hpp"
#include "loghint/parallel.hpp"
#include "loghint/rng.hpp"

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

struct MstEdge {
    int u, v;
    double w;
};

struct CondensedCluster {
    int parent = -1;
    double birth_lambda = 0.0;
    double split_lambda = 0.0;
    int pass_count = 0;  // points handed to the two children at the split
    std::vector<int> children;
    double exit_lambda_sum = 0.0;
    int exit_count = 0;
    int min_point = std::numeric_limits<int>::max();
};

}  // namespace

HdbscanResult hdbscan(const std::vector<std::vector<double>>& points, int min_cluster_size,
                      int min_samples) {
    HdbscanResult res;
    const int n = static_cast<int>(points.size());
    if (n == 0) {
        res.degenerate = true;
        return res;
    }
    res.labels.assign(static_cast<std::size_t>(n), kNoise);
    if (n == 1) {
        res.labels[0] = 0;
        res.cluster_count = 1;
        res.degenerate = true;
        return res;
    }
    min_samples = std::max(1, std::min(min_samples, n - 1));

    std::vector<double> dist(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    double max_d = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = euclidean(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
            dist[static_cast<std::size_t>(i) * n + j] = d;
            dist[static_cast<std::size_t>(j) * n + i] = d;
            max_d = std::max(max_d, d);
        }
    }
    if (max_d == 0.0) {
        // Degenerate input: everything identical forms one cluster, no noise.
        std::fill(res.labels.begin(), res.labels.end(), 0);
        res.cluster_count = 1;
        res.degenerate = true;
        return res;
    }
    if (n < min_cluster_size) {
        res.degenerate = true;  // nothing can reach min_cluster_size
        return res;
    }

    // Core distance: distance to the min_samples-th nearest other point.
    std::vector<double> core(static_cast<std::size_t>(n));
    std::vector<double> row(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        int k = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) row[static_cast<std::size_t>(k++)] = dist[static_cast<std::size_t>(i) * n + j];
        std::nth_element(row.begin(), row.begin() + (min_samples - 1), row.end());
        core[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(min_samples - 1)];
    }

    auto mreach = [&](int i, int j) {
        return std::max({dist[static_cast<std::size_t>(i) * n + j], core[static_cast<std::size_t>(i)],
                         core[static_cast<std::size_t>(j)]});
    };

    // Prim MST over the complete mutual-reachability graph, deterministic
    // tie-breaking by point index.
    std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
    std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    std::vector<MstEdge> mst;
    mst.reserve(static_cast<std::size_t>(n - 1));
    best[0] = 0.0;
    for (int step = 0; step < n; ++step) {
        int u = -1;
        for (int i = 0; i < n; ++i) {
            if (in_tree[static_cast<std::size_t>(i)]) continue;
            if (u == -1 || best[static_cast<std::size_t>(i)] < best[static_cast<std::size_t>(u)]) u = i;
        }
        in_tree[static_cast<std::size_t>(u)] = true;
        if (parent[static_cast<std::size_t>(u)] >= 0)
            mst.push_back({parent[static_cast<std::size_t>(u)], u, best[static_cast<std::size_t>(u)]});
        for (int i = 0; i < n; ++i) {
            if (in_tree[static_cast<std::size_t>(i)]) continue;
            double w = mreach(u, i);
            if (w < best[static_cast<std::size_t>(i)]) {
                best[static_cast<std::size_t>(i)] = w;
                parent[static_cast<std::size_t>(i)] = u;
            }
        }
    }
    std::sort(mst.begin(), mst.end(), [](const MstEdge& a, const MstEdge& b) {
        if (a.w != b.w) return a.w < b.w;
        int amin = std::min(a.u, a.v), bmin = std::min(b.u, b.v);
        if (amin != bmin) return amin < bmin;
        return std::max(a.u, a.v) < std::max(b.u, b.v);
    });

    // Single-linkage hierarchy: leaves 0..n-1, merges n..2n-2.
    const int total_nodes = 2 * n - 1;
    std::vector<int> left(static_cast<std::size_t>(total_nodes), -1);
    std::vector<int> right(static_cast<std::size_t>(total_nodes), -1);
    std::vector<double> merge_dist(static_cast<std::size_t>(total_nodes), 0.0);
    std::vector<int> subtree_size(static_cast<std::size_t>(total_nodes), 1);

    std::vector<int> uf_parent(static_cast<std::size_t>(n));
    std::iota(uf_parent.begin(), uf_parent.end(), 0);
    std::vector<int> comp_node(static_cast<std::size_t>(n));
    std::iota(comp_node.begin(), comp_node.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (uf_parent[static_cast<std::size_t>(x)] != x) {
            uf_parent[static_cast<std::size_t>(x)] =
                uf_parent[static_cast<std::size_t>(uf_parent[static_cast<std::size_t>(x)])];
            x = uf_parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (std::size_t e = 0; e < mst.size(); ++e) {
        int ra = find(mst[e].u), rb = find(mst[e].v);
        int node = n + static_cast<int>(e);
        left[static_cast<std::size_t>(node)] = comp_node[static_cast<std::size_t>(ra)];
        right[static_cast<std::size_t>(node)] = comp_node[static_cast<std::size_t>(rb)];
        merge_dist[static_cast<std::size_t>(node)] = mst[e].w;
        subtree_size[static_cast<std::size_t>(node)] =
            subtree_size[static_cast<std::size_t>(left[static_cast<std::size_t>(node)])] +
            subtree_size[static_cast<std::size_t>(right[static_cast<std::size_t>(node)])];
        uf_parent[static_cast<std::size_t>(ra)] = rb;
        comp_node[static_cast<std::size_t>(rb)] = node;
    }
    const int root = total_nodes - 1;

    // Condense at min_cluster_size. Lambda = 1/distance, with zero-distance
    // merges floored to keep arithmetic finite.
    const double floor_d = 1e-9 * max_d;
    auto lambda_of = [&](double d) { return 1.0 / std::max(d, floor_d); };

    std::vector<CondensedCluster> clusters;
    clusters.push_back({});  // root cluster, birth lambda 0
    std::vector<int> exit_cluster(static_cast<std::size_t>(n), 0);
    std::vector<double> exit_lambda(static_cast<std::size_t>(n), 0.0);

    // Record every leaf under `h` as exiting `cluster` at lambda `lam`.
    auto spill = [&](int h, int cluster, double lam) {
        std::vector<int> stack{h};
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            if (x < n) {
                exit_cluster[static_cast<std::size_t>(x)] = cluster;
                exit_lambda[static_cast<std::size_t>(x)] = lam;
                clusters[static_cast<std::size_t>(cluster)].exit_lambda_sum += lam;
                clusters[static_cast<std::size_t>(cluster)].exit_count += 1;
                clusters[static_cast<std::size_t>(cluster)].min_point =
                    std::min(clusters[static_cast<std::size_t>(cluster)].min_point, x);
                continue;
            }
            stack.push_back(left[static_cast<std::size_t>(x)]);
            stack.push_back(right[static_cast<std::size_t>(x)]);
        }
    };

    std::vector<std::pair<int, int>> work{{root, 0}};  // (hierarchy node, cluster)
    while (!work.empty()) {
        auto [h, c] = work.back();
        work.pop_back();
        if (h < n) {
            spill(h, c, lambda_of(floor_d));
            continue;
        }
        int l = left[static_cast<std::size_t>(h)], r = right[static_cast<std::size_t>(h)];
        double lam = lambda_of(merge_dist[static_cast<std::size_t>(h)]);
        int sl = subtree_size[static_cast<std::size_t>(l)];
        int sr = subtree_size[static_cast<std::size_t>(r)];
        bool l_big = sl >= min_cluster_size;
        bool r_big = sr >= min_cluster_size;
        if (l_big && r_big) {
            int cl = static_cast<int>(clusters.size());
            clusters.push_back({c, lam, 0.0, 0, {}, 0.0, 0, std::numeric_limits<int>::max()});
            int cr = static_cast<int>(clusters.size());
            clusters.push_back({c, lam, 0.0, 0, {}, 0.0, 0, std::numeric_limits<int>::max()});
            clusters[static_cast<std::size_t>(c)].children = {cl, cr};
            clusters[static_cast<std::size_t>(c)].split_lambda = lam;
            clusters[static_cast<std::size_t>(c)].pass_count = sl + sr;
            work.emplace_back(l, cl);
            work.emplace_back(r, cr);
        } else if (!l_big && !r_big) {
            spill(l, c, lam);
            spill(r, c, lam);
        } else {
            spill(l_big ? r : l, c, lam);
            work.emplace_back(l_big ? l : r, c);
        }
    }

    // Propagate min_point up so final label order follows smallest member.
    for (int c = static_cast<int>(clusters.size()) - 1; c >= 1; --c) {
        auto& cl = clusters[static_cast<std::size_t>(c)];
        auto& par = clusters[static_cast<std::size_t>(cl.parent)];
        par.min_point = std::min(par.min_point, cl.min_point);
    }

    // Stability and excess-of-mass selection; children ids exceed parents so
    // a reverse sweep is bottom-up.
    std::vector<double> stability(clusters.size(), 0.0);
    std::vector<double> subtree_stability(clusters.size(), 0.0);
    std::vector<bool> wins(clusters.size(), false);
    for (int c = static_cast<int>(clusters.size()) - 1; c >= 0; --c) {
        const auto& cl = clusters[static_cast<std::size_t>(c)];
        int total = cl.exit_count + cl.pass_count;
        stability[static_cast<std::size_t>(c)] = cl.exit_lambda_sum +
                                                 cl.split_lambda * cl.pass_count -
                                                 cl.birth_lambda * total;
        if (cl.children.empty()) {
            wins[static_cast<std::size_t>(c)] = true;
            subtree_stability[static_cast<std::size_t>(c)] = stability[static_cast<std::size_t>(c)];
        } else {
            double child_sum = 0.0;
            for (int ch : cl.children) child_sum += subtree_stability[static_cast<std::size_t>(ch)];
            if (child_sum > stability[static_cast<std::size_t>(c)]) {
                subtree_stability[static_cast<std::size_t>(c)] = child_sum;
            } else {
                wins[static_cast<std::size_t>(c)] = true;
                subtree_stability[static_cast<std::size_t>(c)] = stability[static_cast<std::size_t>(c)];
            }
        }
    }
    std::vector<bool> selected(clusters.size(), false);
    std::vector<int> dfs{0};
    while (!dfs.empty()) {
        int c = dfs.back();
        dfs.pop_back();
        if (wins[static_cast<std::size_t>(c)]) {
            selected[static_cast<std::size_t>(c)] = true;
            continue;
        }
        for (int ch : clusters[static_cast<std::size_t>(c)].children) dfs.push_back(ch);
    }

    // Label ids ordered by smallest member point.
    std::vector<int> chosen;
    for (std::size_t c = 0; c < clusters.size(); ++c)
        if (selected[c]) chosen.push_back(static_cast<int>(c));
    std::sort(chosen.begin(), chosen.end(), [&](int a, int b) {
        return clusters[static_cast<std::size_t>(a)].min_point <
               clusters[static_cast<std::size_t>(b)].min_point;
    });
    std::vector<int> label_of(clusters.size(), kNoise);
    for (std::size_t i = 0; i < chosen.size(); ++i)
        label_of[static_cast<std::size_t>(chosen[i])] = static_cast<int>(i);

    for (int p = 0; p < n; ++p) {
        int c = exit_cluster[static_cast<std::size_t>(p)];
        int label = kNoise;
        while (c >= 0) {
            if (selected[static_cast<std::size_t>(c)]) {
                label = label_of[static_cast<std::size_t>(c)];
                break;
            }
            c = clusters[static_cast<std::size_t>(c)].parent;
        }
        res.labels[static_cast<std::size_t>(p)] = label;
    }
    res.cluster_count = static_cast<int>(chosen.size());
    if (res.cluster_count == 1 && chosen[0] == 0) res.degenerate = true;  // root won
    return res;
}

std::vector<std::pair<int, int>> hdbscan_grid_cells(int n_files) {
    std::vector<double> raw = {n_files / 300.0, n_files / 150.0, 25, 40, 50, 75, 100, n_files / 10.0};
    std::vector<int> mcs_values;
    for (double v : raw) {
        int mcs = static_cast<int>(std::lround(v));
        mcs_values.push_back(std::max(2, mcs));
    }
    std::sort(mcs_values.begin(), mcs_values.end());
    mcs_values.erase(std::unique(mcs_values.begin(), mcs_values.end()), mcs_values.end());

    std::vector<std::pair<int, int>> cells;
    for (int mcs : mcs_values) {
        std::vector<int> ms_values = {std::max(1, static_cast<int>(std::lround(0.5 * mcs))),
                                      std::max(1, static_cast<int>(std::lround(0.25 * mcs)))};
        std::sort(ms_values.begin(), ms_values.end());
        ms_values.erase(std::unique(ms_values.begin(), ms_values.end()), ms_values.end());
        for (int ms : ms_values) cells.emplace_back(mcs, ms);
    }
    return cells;
}

GridSearchResult hdbscan_grid_search(const std::vector<std::vector<double>>& points, int n_files) {
    auto cells = hdbscan_grid_cells(n_files);
    std::vector<GridCell> report(cells.size());
    std::vector<HdbscanResult> runs(cells.size());

    parallel_for(cells.size(), [&](std::size_t i) {
        auto [mcs, ms] = cells[i];
        HdbscanResult r = hdbscan(points, mcs, ms);
        GridCell cell;
        cell.mcs = mcs;
        cell.ms = ms;
        cell.clusters = r.cluster_count;
        cell.coverage = coverage_of(r.labels);
        if (r.cluster_count >= 2) {
            cell.silhouette = silhouette_score(points, r.labels).value_or(-1.0);
            cell.dbi = davies_bouldin_index(points, r.labels);
        } else {
            cell.silhouette = -1.0;  // scored worst per the selection rule
        }
        report[i] = cell;
        runs[i] = std::move(r);
    });

    GridSearchResult result;
    result.report = report;

    // Lexicographic: silhouette desc, dbi asc, coverage desc, mcs asc, ms asc.
    int best = -1;
    for (std::size_t i = 0; i < report.size(); ++i) {
        if (best < 0) {
            best = static_cast<int>(i);
            continue;
        }
        const GridCell& a = report[i];
        const GridCell& b = report[static_cast<std::size_t>(best)];
        bool better = false;
        if (a.silhouette != b.silhouette) {
            better = a.silhouette > b.silhouette;
        } else {
            double da = a.dbi.value_or(std::numeric_limits<double>::infinity());
            double db = b.dbi.value_or(std::numeric_limits<double>::infinity());
            if (da != db)
                better = da < db;
            else if (a.coverage != b.coverage)
                better = a.coverage > b.coverage;
            else if (a.mcs != b.mcs)
                better = a.mcs < b.mcs;
            else
                better = a.ms < b.ms;
        }
        if (better) best = static_cast<int>(i);
    }

    if (best < 0 || report[static_cast<std::size_t>(best)].silhouette <= -1.0) {
        // Every cell degenerate: hand back the smallest cell, flagged.
        best = 0;
        result.degenerate_warning = true;
    }
    result.best = {cells[static_cast<std::size_t>(best)].first,
                   cells[static_cast<std::size_t>(best)].second};
    result.clustering = std::move(runs[static_cast<std::size_t>(best)]);
    return result;
}

AriSummary bootstrap_stability(const std::vector<std::vector<double>>& points,
                               const HdbscanParams& params, int iterations, std::uint64_t seed) {
    const std::size_t n = points.size();
    HdbscanResult reference = hdbscan(points, params.min_cluster_size, params.min_samples);
    // A reference without real structure (all noise, or the degenerate
    // whole-set cluster) has nothing to be stable about.
    bool reference_structureless = reference.cluster_count == 0 || reference.degenerate;

    AriSummary summary;
    summary.values.assign(static_cast<std::size_t>(iterations), 0.0);
    parallel_for(static_cast<std::size_t>(iterations), [&](std::size_t it) {
        if (reference_structureless) {
            summary.values[it] = 0.0;
            return;
        }
        Rng rng(Rng::mix(seed, 0xb007 + it));
        std::vector<std::size_t> draw(n);
        std::vector<std::vector<double>> resampled(n);
        for (std::size_t i = 0; i < n; ++i) {
            draw[i] = rng.below(n);
            resampled[i] = points[draw[i]];
        }
        HdbscanResult boot = hdbscan(resampled, params.min_cluster_size, params.min_samples);
        if (boot.cluster_count == 0 || boot.degenerate) {
            summary.values[it] = 0.0;  // no structure in this iteration
            return;
        }
        // Induced labels on the unique resampled points (first occurrence).
        std::vector<int> seen(n, -1);
        std::vector<int> ref_labels, boot_labels;
        for (std::size_t i = 0; i < n; ++i) {
            if (seen[draw[i]] != -1) continue;
            seen[draw[i]] = 1;
            ref_labels.push_back(reference.labels[draw[i]]);
            boot_labels.push_back(boot.labels[i]);
        }
        summary.values[it] = adjusted_rand_index(ref_labels, boot_labels);
    });

    double mean = 0.0;
    for (double v : summary.values) mean += v;
    mean /= static_cast<double>(iterations);
    double var = 0.0;
    for (double v : summary.values) var += (v - mean) * (v - mean);
    if (iterations > 1) var /= static_cast<double>(iterations - 1);
    summary.mean = mean;
    summary.stddev = std::sqrt(var);
    return summary;
}

}  // namespace loghint
