#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loghint/levels.hpp"

namespace loghint {

/// Pair-counting adjusted Rand index. Degenerate zero denominator (e.g.
/// single cluster vs single cluster) is 1.0 by convention.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// One-vs-rest AUC per class present in `labels`, macro-averaged; absent
/// classes are skipped. nullopt when fewer than two classes occur.
/// scores[i][c] is record i's score for class c. Ties contribute half.
std::optional<double> auc_multiclass(const std::vector<std::vector<double>>& scores,
                                     std::span<const int> labels);

double precision_exact(std::span<const int> predicted, std::span<const int> truth);

/// Mean of 1 - |ordinal error| / maxdist(truth), maxdist per scale position.
double average_ordinal_distance(std::span<const int> predicted, std::span<const int> truth,
                                const LevelScale& scale);

struct PairedComparison {
    double p_value = 1.0;
    double cohens_d = 0.0;  // +/-inf sentinel when sd of differences is 0
    std::string effect_label = "negligible";
};

/// Paired Wilcoxon signed-rank (Pratt zero handling; exact distribution for
/// up to 25 nonzero differences, normal approximation with tie correction
/// above) plus Cohen's d of the paired differences.
PairedComparison paired_comparison(std::span<const double> a, std::span<const double> b);

/// Two-sided signed-rank p-value of the differences; exposed for tests.
double wilcoxon_signed_rank_p(std::span<const double> diffs);

std::string effect_size_label(double d);

}  // namespace loghint
