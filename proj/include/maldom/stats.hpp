#pragma once

#include <string>
#include <vector>

#include "maldom/types.hpp"

namespace maldom {

/// Descending mid-ranks within one block: the largest value gets rank 1 and
/// ties share the average of the ranks they span, so every block's ranks sum
/// to k(k+1)/2.
Vector descending_ranks(const Vector& values);

struct FriedmanResult {
    Matrix ranks;       // one row of ranks per block
    Vector mean_ranks;  // per model, lower is better
    double chi_square = 0.0;
    int n_blocks = 0;
    int n_models = 0;
};

/// Friedman rank analysis over a blocks-by-models score matrix (greater
/// scores are better).
FriedmanResult friedman(const Matrix& scores);

enum class WilcoxonMethod { Exact, NormalApproximation };

struct WilcoxonResult {
    double statistic = 0.0;  // W = min(W+, W-)
    double w_plus = 0.0;
    double w_minus = 0.0;
    int n_effective = 0;  // pairs left after dropping zero differences
    double p_value = 1.0;  // two-sided
    WilcoxonMethod method = WilcoxonMethod::Exact;
    bool degenerate = false;  // every difference was zero
};

/// Paired two-sided Wilcoxon signed-rank test. Zero differences are dropped
/// and tied magnitudes share mid-ranks. Up to 20 effective pairs the p-value
/// is computed exactly by enumerating the signed-rank distribution;
/// beyond that a tie-corrected normal approximation with continuity
/// correction is used.
WilcoxonResult wilcoxon_signed_rank(const Vector& a, const Vector& b);

struct PairwiseComparison {
    std::string model_a;
    std::string model_b;
    WilcoxonResult test;
    bool significant = false;
};

/// Wilcoxon tests over every model pair (columns of the score matrix),
/// flagged at the given significance level.
std::vector<PairwiseComparison> pairwise_comparison_table(
    const std::vector<std::string>& names, const Matrix& scores, double alpha = 0.05);

}  // namespace maldom
