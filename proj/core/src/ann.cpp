#include "loghint/ann.hpp"

#include <algorithm>
#include <cmath>

#include "loghint/rng.hpp"

namespace loghint {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void normalize(std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    if (n <= 0.0) return;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
}

}  // namespace

void IvfIndex::build(const std::vector<std::vector<double>>& vectors, const std::vector<int>& ids,
                     std::uint64_t seed, int kmeans_iters) {
    centroids_.clear();
    lists_.clear();
    const std::size_t n = vectors.size();
    if (n == 0) return;

    int nlist = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
    nlist = std::min<int>(nlist, static_cast<int>(n));

    // Seeded distinct starting points.
    Rng rng(Rng::mix(seed, 0x1cf));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (int c = 0; c < nlist; ++c) centroids_.push_back(vectors[order[static_cast<std::size_t>(c)]]);

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < kmeans_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_dot = -2.0;
            for (int c = 0; c < nlist; ++c) {
                double d = dot(vectors[i], centroids_[static_cast<std::size_t>(c)]);
                if (d > best_dot) {
                    best_dot = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<std::vector<double>> sums(static_cast<std::size_t>(nlist),
                                              std::vector<double>(vectors[0].size(), 0.0));
        std::vector<int> counts(static_cast<std::size_t>(nlist), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = sums[static_cast<std::size_t>(assign[i])];
            for (std::size_t j = 0; j < s.size(); ++j) s[j] += vectors[i][j];
            ++counts[static_cast<std::size_t>(assign[i])];
        }
        for (int c = 0; c < nlist; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) continue;  // empty list is fine
            auto& s = sums[static_cast<std::size_t>(c)];
            for (double& x : s) x /= counts[static_cast<std::size_t>(c)];
            normalize(s);
            centroids_[static_cast<std::size_t>(c)] = s;
        }
        if (!changed) break;
    }

    lists_.assign(static_cast<std::size_t>(nlist), {});
    for (std::size_t i = 0; i < n; ++i)
        lists_[static_cast<std::size_t>(assign[i])].push_back(ids[i]);
    for (auto& l : lists_) std::sort(l.begin(), l.end());
}

std::vector<int> IvfIndex::probe(const std::vector<double>& query, int nprobe) const {
    std::vector<int> out;
    if (lists_.empty()) return out;
    nprobe = std::max(1, std::min<int>(nprobe, static_cast<int>(centroids_.size())));

    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(centroids_.size());
    for (std::size_t c = 0; c < centroids_.size(); ++c)
        ranked.emplace_back(dot(query, centroids_[c]), static_cast<int>(c));
    std::partial_sort(ranked.begin(), ranked.begin() + nprobe, ranked.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
    for (int p = 0; p < nprobe; ++p) {
        const auto& list = lists_[static_cast<std::size_t>(ranked[static_cast<std::size_t>(p)].second)];
        out.insert(out.end(), list.begin(), list.end());
    }
    return out;
}

}  // namespace loghint
