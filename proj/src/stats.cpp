#include "maldom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maldom/errors.hpp"
#include "maldom/mathutil.hpp"

namespace maldom {

Vector descending_ranks(const Vector& values) {
    const Eigen::Index k = values.size();
    Vector ranks(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        int greater = 0, equal = 0;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (values[j] > values[i]) ++greater;
            if (values[j] == values[i]) ++equal;
        }
        ranks[i] = greater + (equal + 1) / 2.0;
    }
    return ranks;
}

FriedmanResult friedman(const Matrix& scores) {
    const Eigen::Index n = scores.rows();
    const Eigen::Index k = scores.cols();
    if (n < 1 || k < 2)
        throw ConfigError("friedman needs at least one block and two models");
    FriedmanResult result;
    result.n_blocks = static_cast<int>(n);
    result.n_models = static_cast<int>(k);
    result.ranks.resize(n, k);
    for (Eigen::Index b = 0; b < n; ++b)
        result.ranks.row(b) = descending_ranks(scores.row(b).transpose()).transpose();
    result.mean_ranks = result.ranks.colwise().mean().transpose();
    double sum_sq = result.mean_ranks.squaredNorm();
    double kk = static_cast<double>(k);
    result.chi_square = 12.0 * static_cast<double>(n) / (kk * (kk + 1.0)) *
                        (sum_sq - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
    return result;
}

namespace {

// Exact null distribution of W+ by dynamic programming over doubled ranks
// (mid-ranks are half-integers, so doubling keeps sums integral).
double exact_two_sided_p(const std::vector<double>& ranks, double w_small) {
    long total = 0;
    for (double r : ranks) total += static_cast<long>(std::llround(2.0 * r));
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (double r : ranks) {
        long dr = static_cast<long>(std::llround(2.0 * r));
        for (long s = reach; s >= 0; --s)
            if (count[static_cast<std::size_t>(s)] > 0.0)
                count[static_cast<std::size_t>(s + dr)] += count[static_cast<std::size_t>(s)];
        reach += dr;
    }
    long cutoff = static_cast<long>(std::llround(2.0 * w_small));
    double below = 0.0;
    for (long s = 0; s <= cutoff && s <= reach; ++s) below += count[static_cast<std::size_t>(s)];
    double p = 2.0 * below / std::ldexp(1.0, static_cast<int>(ranks.size()));
    return std::min(1.0, p);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("wilcoxon needs paired samples of equal length");
    if (a.size() < 1) throw ConfigError("wilcoxon needs at least one pair");

    std::vector<double> diffs;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    WilcoxonResult result;
    result.n_effective = static_cast<int>(diffs.size());
    if (diffs.empty()) {
        result.degenerate = true;
        return result;
    }

    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });
    std::vector<double> ranks(n, 0.0);
    std::vector<std::size_t> tie_sizes;
    for (std::size_t at = 0; at < n;) {
        std::size_t end = at;
        while (end < n && std::abs(diffs[order[end]]) == std::abs(diffs[order[at]])) ++end;
        double mid = (static_cast<double>(at + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t i = at; i < end; ++i) ranks[order[i]] = mid;
        tie_sizes.push_back(end - at);
        at = end;
    }

    for (std::size_t i = 0; i < n; ++i)
        (diffs[i] > 0.0 ? result.w_plus : result.w_minus) += ranks[i];
    result.statistic = std::min(result.w_plus, result.w_minus);

    if (n <= 20) {
        result.method = WilcoxonMethod::Exact;
        result.p_value = exact_two_sided_p(ranks, result.statistic);
    } else {
        result.method = WilcoxonMethod::NormalApproximation;
        double nn = static_cast<double>(n);
        double mu = nn * (nn + 1.0) / 4.0;
        double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
        for (std::size_t t : tie_sizes) {
            double tt = static_cast<double>(t);
            var -= (tt * tt * tt - tt) / 48.0;
        }
        double z = (result.statistic - mu + 0.5) / std::sqrt(var);
        result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
    }
    return result;
}

std::vector<PairwiseComparison> pairwise_comparison_table(const std::vector<std::string>& names,
                                                          const Matrix& scores, double alpha) {
    if (static_cast<Eigen::Index>(names.size()) != scores.cols())
        throw ShapeError("one name is needed per score column");
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha must lie in (0, 1)");
    std::vector<PairwiseComparison> table;
    for (Eigen::Index i = 0; i < scores.cols(); ++i)
        for (Eigen::Index j = i + 1; j < scores.cols(); ++j) {
            PairwiseComparison cmp;
            cmp.model_a = names[static_cast<std::size_t>(i)];
            cmp.model_b = names[static_cast<std::size_t>(j)];
            cmp.test = wilcoxon_signed_rank(scores.col(i), scores.col(j));
            cmp.significant = cmp.test.p_value < alpha;
            table.push_back(std::move(cmp));
        }
    return table;
}

}  // namespace maldom
