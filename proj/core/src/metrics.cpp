#include "loghint/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace loghint {

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    const std::size_t n = a.size();
    std::map<std::pair<int, int>, long long> cells;
    std::map<int, long long> row, col;
    for (std::size_t i = 0; i < n; ++i) {
        ++cells[{a[i], b[i]}];
        ++row[a[i]];
        ++col[b[i]];
    }
    auto choose2 = [](long long x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); };
    double index = 0.0, row_sum = 0.0, col_sum = 0.0;
    for (const auto& [_, c] : cells) index += choose2(c);
    for (const auto& [_, c] : row) row_sum += choose2(c);
    for (const auto& [_, c] : col) col_sum += choose2(c);
    double total = choose2(static_cast<long long>(n));
    if (total <= 0.0) return 1.0;
    double expected = row_sum * col_sum / total;
    double max_index = 0.5 * (row_sum + col_sum);
    double denom = max_index - expected;
    if (std::abs(denom) < 1e-300) return 1.0;
    return (index - expected) / denom;
}

namespace {

/// Binary AUC via the rank-sum statistic with midranks for ties.
double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });

    double pos_rank_sum = 0.0;
    std::size_t pos = 0, i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (positive[order[k]]) {
                pos_rank_sum += midrank;
                ++pos;
            }
        }
        i = j;
    }
    std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) return std::numeric_limits<double>::quiet_NaN();
    double u = pos_rank_sum - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1);
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace

std::optional<double> auc_multiclass(const std::vector<std::vector<double>>& scores,
                                     std::span<const int> labels) {
    std::set<int> present(labels.begin(), labels.end());
    if (present.size() < 2) return std::nullopt;

    double sum = 0.0;
    int used = 0;
    for (int cls : present) {
        std::vector<double> s(labels.size());
        std::vector<bool> pos(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            s[i] = cls < static_cast<int>(scores[i].size())
                       ? scores[i][static_cast<std::size_t>(cls)]
                       : 0.0;
            pos[i] = labels[i] == cls;
        }
        double auc = binary_auc(s, pos);
        if (!std::isnan(auc)) {
            sum += auc;
            ++used;
        }
    }
    if (used == 0) return std::nullopt;
    return sum / static_cast<double>(used);
}

double precision_exact(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double average_ordinal_distance(std::span<const int> predicted, std::span<const int> truth,
                                const LevelScale& scale) {
    if (predicted.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        int dist = std::abs(predicted[i] - truth[i]);
        int max_dist = scale.max_ordinal_distance(truth[i]);
        sum += max_dist > 0 ? 1.0 - static_cast<double>(dist) / static_cast<double>(max_dist) : 1.0;
    }
    return sum / static_cast<double>(predicted.size());
}

namespace {

double normal_sf(double z) {  // P(Z > z)
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

double wilcoxon_signed_rank_p(std::span<const double> diffs) {
    // Pratt: zeros take part in ranking, then drop out of the statistic.
    struct Item {
        double abs;
        int sign;
    };
    std::vector<Item> items;
    items.reserve(diffs.size());
    for (double d : diffs)
        items.push_back({std::abs(d), d > 0 ? 1 : (d < 0 ? -1 : 0)});
    if (items.empty()) return 1.0;
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.abs < y.abs; });

    const std::size_t n = items.size();
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && items[j].abs == items[i].abs) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) rank[k] = midrank;
        i = j;
    }

    std::vector<double> nonzero_ranks;
    double w_plus = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (items[k].sign == 0) continue;
        nonzero_ranks.push_back(rank[k]);
        if (items[k].sign > 0) w_plus += rank[k];
    }
    if (nonzero_ranks.empty()) return 1.0;  // all differences zero

    if (nonzero_ranks.size() <= 25) {
        // Exact conditional null: each nonzero rank flips sign independently.
        // Doubling makes tied midranks integral for the DP.
        std::vector<long long> r2;
        long long total = 0;
        for (double r : nonzero_ranks) {
            long long v = static_cast<long long>(std::llround(2.0 * r));
            r2.push_back(v);
            total += v;
        }
        std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
        count[0] = 1.0;
        for (long long v : r2) {
            for (long long s = total; s >= v; --s)
                count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - v)];
        }
        long long w2 = static_cast<long long>(std::llround(2.0 * w_plus));
        double below = 0.0, above = 0.0, all = 0.0;
        for (long long s = 0; s <= total; ++s) {
            double c = count[static_cast<std::size_t>(s)];
            all += c;
            if (s <= w2) below += c;
            if (s >= w2) above += c;
        }
        double p = 2.0 * std::min(below, above) / all;
        return std::min(1.0, p);
    }

    // Normal approximation with Pratt zero adjustment and tie correction.
    double nn = static_cast<double>(n);
    std::size_t zeros = n - nonzero_ranks.size();
    double zz = static_cast<double>(zeros);
    double mean = (nn * (nn + 1.0) - zz * (zz + 1.0)) / 4.0;
    double var = (nn * (nn + 1.0) * (2.0 * nn + 1.0) - zz * (zz + 1.0) * (2.0 * zz + 1.0)) / 24.0;
    // Tie groups over the nonzero magnitudes.
    i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && items[j].abs == items[i].abs) ++j;
        if (items[i].sign != 0) {
            double t = static_cast<double>(j - i);
            var -= t * (t * t - 1.0) / 48.0;
        }
        i = j;
    }
    if (var <= 0.0) return 1.0;
    double z = (w_plus - mean);
    double correction = z > 0 ? -0.5 : (z < 0 ? 0.5 : 0.0);
    z = (z + correction) / std::sqrt(var);
    return std::min(1.0, 2.0 * normal_sf(std::abs(z)));
}

std::string effect_size_label(double d) {
    double a = std::abs(d);
    if (a < 0.2) return "negligible";
    if (a < 0.5) return "small";
    if (a < 0.8) return "medium";
    return "large";
}

PairedComparison paired_comparison(std::span<const double> a, std::span<const double> b) {
    PairedComparison out;
    const std::size_t n = std::min(a.size(), b.size());
    if (n == 0) return out;
    std::vector<double> diffs(n);
    for (std::size_t i = 0; i < n; ++i) diffs[i] = a[i] - b[i];

    out.p_value = wilcoxon_signed_rank_p(diffs);

    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
    double sd = std::sqrt(var);
    if (sd == 0.0) {
        out.cohens_d = mean == 0.0 ? 0.0
                                   : (mean > 0 ? std::numeric_limits<double>::infinity()
                                               : -std::numeric_limits<double>::infinity());
    } else {
        out.cohens_d = mean / sd;
    }
    out.effect_label = effect_size_label(out.cohens_d);
    return out;
}

}  // namespace loghint
