#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "maldom/errors.hpp"
#include "maldom/random.hpp"
#include "maldom/stats.hpp"

using namespace maldom;

namespace {

// Independent exact two-sided p: drop zero differences, mid-rank the
// magnitudes, then enumerate all 2^n sign assignments of the null.
double wilcoxon_oracle_p(const Vector& a, const Vector& b, double* w_small_out = nullptr) {
    std::vector<double> diffs;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
    const std::size_t n = diffs.size();
    REQUIRE(n >= 1);
    REQUIRE(n <= 16);  // keep the enumeration cheap

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });
    std::vector<double> ranks(n);
    for (std::size_t at = 0; at < n;) {
        std::size_t end = at;
        while (end < n && std::abs(diffs[order[end]]) == std::abs(diffs[order[at]])) ++end;
        double mid = (static_cast<double>(at + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t i = at; i < end; ++i) ranks[order[i]] = mid;
        at = end;
    }

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) (diffs[i] > 0.0 ? w_plus : w_minus) += ranks[i];
    double w_small = std::min(w_plus, w_minus);
    if (w_small_out) *w_small_out = w_small;

    long at_or_below = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) w += ranks[i];
        if (w <= w_small) ++at_or_below;
    }
    double p = 2.0 * static_cast<double>(at_or_below) / std::ldexp(1.0, static_cast<int>(n));
    return std::min(1.0, p);
}

Vector make_vector(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("descending ranks with and without ties") {
    Vector r = descending_ranks(make_vector({3.0, 1.0, 2.0}));
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 3.0);
    CHECK(r[2] == 2.0);

    r = descending_ranks(make_vector({5.0, 5.0, 1.0}));
    CHECK(r[0] == 1.5);
    CHECK(r[1] == 1.5);
    CHECK(r[2] == 3.0);

    r = descending_ranks(make_vector({2.0, 2.0, 2.0}));
    CHECK(r[0] == 2.0);
    CHECK(r[1] == 2.0);
    CHECK(r[2] == 2.0);
}

TEST_CASE("friedman on a total order gives chi-square 8") {
    // Four blocks, three models, always the same order.
    Matrix scores(4, 3);
    scores << 0.9, 0.8, 0.7, 0.95, 0.85, 0.75, 0.91, 0.91 - 0.1, 0.71, 0.99, 0.89, 0.79;
    FriedmanResult fr = friedman(scores);
    CHECK(fr.n_blocks == 4);
    CHECK(fr.n_models == 3);
    CHECK(fr.mean_ranks[0] == 1.0);
    CHECK(fr.mean_ranks[1] == 2.0);
    CHECK(fr.mean_ranks[2] == 3.0);
    CHECK(fr.chi_square == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("friedman on identical scores is flat") {
    Matrix scores = Matrix::Constant(5, 4, 0.5);
    FriedmanResult fr = friedman(scores);
    for (Eigen::Index m = 0; m < 4; ++m) CHECK(fr.mean_ranks[m] == 2.5);
    CHECK(fr.chi_square == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("friedman block ranks always sum to k(k+1)/2") {
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + static_cast<int>(rng.uniform_index(6));
        int k = 2 + static_cast<int>(rng.uniform_index(5));
        Matrix scores(n, k);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < k; ++j)
                scores(i, j) = std::floor(rng.uniform(0.0, 4.0));  // force ties
        FriedmanResult fr = friedman(scores);
        double expect = k * (k + 1) / 2.0;
        for (Eigen::Index i = 0; i < n; ++i)
            CHECK(fr.ranks.row(i).sum() == doctest::Approx(expect).epsilon(1e-12));
        CHECK(fr.mean_ranks.sum() == doctest::Approx(expect).epsilon(1e-12));
        CHECK(fr.chi_square >= -1e-9);
    }
}

TEST_CASE("a model that always wins has mean rank 1") {
    Rng rng(11);
    Matrix scores(6, 4);
    for (Eigen::Index i = 0; i < 6; ++i) {
        for (Eigen::Index j = 1; j < 4; ++j) scores(i, j) = rng.u01() * 0.5;
        scores(i, 0) = 0.9 + 0.1 * rng.u01();
    }
    FriedmanResult fr = friedman(scores);
    CHECK(fr.mean_ranks[0] == 1.0);
    for (Eigen::Index j = 1; j < 4; ++j) CHECK(fr.mean_ranks[j] > 1.0);
}

TEST_CASE("friedman rejects degenerate shapes") {
    CHECK_THROWS_AS(friedman(Matrix(0, 3)), ConfigError);
    CHECK_THROWS_AS(friedman(Matrix::Zero(4, 1)), ConfigError);
}

TEST_CASE("wilcoxon worked example: three equal losses") {
    Vector x = make_vector({1.0, 2.0, 3.0});
    Vector y = make_vector({2.0, 3.0, 4.0});
    WilcoxonResult w = wilcoxon_signed_rank(x, y);
    CHECK(w.n_effective == 3);
    CHECK(w.w_plus == 0.0);
    CHECK(w.w_minus == 6.0);
    CHECK(w.statistic == 0.0);
    CHECK(w.method == WilcoxonMethod::Exact);
    CHECK(w.p_value == 0.25);  // 2 * 1/8: only the empty sign set scores 0
    CHECK_FALSE(w.degenerate);
}

TEST_CASE("wilcoxon on identical samples is degenerate") {
    Vector x = make_vector({0.5, 0.6, 0.7, 0.8});
    WilcoxonResult w = wilcoxon_signed_rank(x, x);
    CHECK(w.degenerate);
    CHECK(w.n_effective == 0);
    CHECK(w.p_value == 1.0);
    CHECK(w.statistic == 0.0);
}

TEST_CASE("wilcoxon is symmetric under argument swap") {
    Vector a = make_vector({0.9, 0.7, 0.85, 0.6, 0.95});
    Vector b = make_vector({0.8, 0.75, 0.7, 0.65, 0.9});
    WilcoxonResult ab = wilcoxon_signed_rank(a, b);
    WilcoxonResult ba = wilcoxon_signed_rank(b, a);
    CHECK(ab.w_plus == ba.w_minus);
    CHECK(ab.w_minus == ba.w_plus);
    CHECK(ab.statistic == ba.statistic);
    CHECK(ab.p_value == ba.p_value);
}

TEST_CASE("a uniform shift bottoms out at p = 2 / 2^n") {
    Vector x(8);
    for (Eigen::Index i = 0; i < 8; ++i) x[i] = 0.1 * static_cast<double>(i);
    Vector y = x.array() + 0.05;
    WilcoxonResult w = wilcoxon_signed_rank(x, y);
    CHECK(w.w_plus == 0.0);
    CHECK(w.p_value == 2.0 / 256.0);
}

TEST_CASE("exact wilcoxon matches full enumeration on random small samples") {
    Rng rng(777);
    for (int trial = 0; trial < 60; ++trial) {
        Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(9));  // 2..10 pairs
        Vector a(n), b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            // Quarter-step grids force magnitude ties and zero differences.
            a[i] = 0.25 * std::floor(rng.uniform(0.0, 8.0));
            b[i] = 0.25 * std::floor(rng.uniform(0.0, 8.0));
        }
        WilcoxonResult w = wilcoxon_signed_rank(a, b);
        if (w.degenerate) {
            CHECK(w.p_value == 1.0);
            continue;
        }
        REQUIRE(w.method == WilcoxonMethod::Exact);
        double w_small = 0.0;
        double p = wilcoxon_oracle_p(a, b, &w_small);
        CHECK(w.statistic == w_small);
        CHECK(w.p_value == p);  // integer-valued halves: bitwise equal
    }
}

TEST_CASE("the exact tail is close to its normal approximation at n = 15") {
    // Alternating signs with magnitudes 1..15: W- = 56, mean 60, variance
    // 310. The exact two-sided p should sit within 0.02 of the
    // continuity-corrected normal tail.
    Vector a(15), b(15);
    for (Eigen::Index i = 0; i < 15; ++i) {
        double mag = static_cast<double>(i + 1);
        a[i] = (i % 2 == 0) ? mag : 0.0;
        b[i] = (i % 2 == 0) ? 0.0 : mag;
    }
    WilcoxonResult w = wilcoxon_signed_rank(a, b);
    REQUIRE(w.method == WilcoxonMethod::Exact);
    CHECK(w.w_minus == 56.0);
    CHECK(w.statistic == 56.0);

    double mu = 15.0 * 16.0 / 4.0;
    double sd = std::sqrt(15.0 * 16.0 * 31.0 / 24.0);
    double z = (w.statistic - mu + 0.5) / sd;
    double p_norm = 2.0 * 0.5 * std::erfc(-z / std::sqrt(2.0));
    CHECK(std::abs(w.p_value - p_norm) < 0.02);
}

TEST_CASE("large samples switch to the tie-corrected normal approximation") {
    Rng rng(55);
    Vector a(25), b(25);
    for (Eigen::Index i = 0; i < 25; ++i) {
        a[i] = rng.u01();
        b[i] = rng.u01();
    }
    WilcoxonResult w = wilcoxon_signed_rank(a, b);
    CHECK(w.n_effective == 25);
    CHECK(w.method == WilcoxonMethod::NormalApproximation);
    CHECK(w.p_value > 0.0);
    CHECK(w.p_value <= 1.0);
    CHECK(w.w_plus + w.w_minus == doctest::Approx(25.0 * 26.0 / 2.0));

    // Shrinking the losing side's differences must not change the ranks,
    // hence not the p-value (rank test, not a magnitude test).
    Vector scaled = b;
    for (Eigen::Index i = 0; i < 25; ++i)
        scaled[i] = a[i] + 0.5 * (b[i] - a[i]);
    CHECK(wilcoxon_signed_rank(a, scaled).p_value == w.p_value);
}

TEST_CASE("wilcoxon rejects malformed input") {
    CHECK_THROWS_AS(wilcoxon_signed_rank(Vector::Zero(3), Vector::Zero(4)), ShapeError);
    CHECK_THROWS_AS(wilcoxon_signed_rank(Vector(0), Vector(0)), ConfigError);
}

TEST_CASE("pairwise table covers each unordered pair once") {
    Rng rng(66);
    Matrix scores(12, 4);
    for (Eigen::Index i = 0; i < 12; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) scores(i, j) = rng.u01();
    std::vector<std::string> names{"ann", "svm", "knn", "gbm"};
    auto table = pairwise_comparison_table(names, scores, 0.05);
    REQUIRE(table.size() == 6);  // 4 choose 2

    std::size_t at = 0;
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = i + 1; j < 4; ++j, ++at) {
            CHECK(table[at].model_a == names[static_cast<std::size_t>(i)]);
            CHECK(table[at].model_b == names[static_cast<std::size_t>(j)]);
            WilcoxonResult direct = wilcoxon_signed_rank(scores.col(i), scores.col(j));
            CHECK(table[at].test.statistic == direct.statistic);
            CHECK(table[at].test.p_value == direct.p_value);
            CHECK(table[at].significant == (direct.p_value < 0.05));
        }

    CHECK_THROWS_AS(pairwise_comparison_table({"a"}, scores, 0.05), ShapeError);
    CHECK_THROWS_AS(pairwise_comparison_table(names, scores, 0.0), ConfigError);
    CHECK_THROWS_AS(pairwise_comparison_table(names, scores, 1.0), ConfigError);
}
