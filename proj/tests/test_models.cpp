#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "maldom/dataset.hpp"
#include "maldom/knn.hpp"
#include "maldom/mlp.hpp"
#include "maldom/naive_bayes.hpp"
#include "maldom/random.hpp"
#include "maldom/svm.hpp"

using namespace maldom;

namespace {

constexpr Label B = Label::Benign;
constexpr Label M = Label::Malicious;

Matrix column(std::initializer_list<double> values) {
    Matrix x(static_cast<Eigen::Index>(values.size()), 1);
    Eigen::Index i = 0;
    for (double v : values) x(i++, 0) = v;
    return x;
}

RowVector query1(double v) {
    RowVector q(1);
    q << v;
    return q;
}

// Reference kNN vote: sort by (squared distance, training index), count the
// first k labels.
double knn_oracle(const Matrix& train, const std::vector<Label>& y, RowRef q, int k) {
    std::vector<std::pair<double, int>> order;
    for (Eigen::Index i = 0; i < train.rows(); ++i)
        order.emplace_back((train.row(i) - q).squaredNorm(), static_cast<int>(i));
    std::sort(order.begin(), order.end());
    int mal = 0;
    for (int i = 0; i < k; ++i)
        if (y[static_cast<std::size_t>(order[static_cast<std::size_t>(i)].second)] == M) ++mal;
    return (2.0 * mal - k) / k;
}

}  // namespace

TEST_CASE("knn votes on a one-dimensional line") {
    Matrix x = column({0.0, 1.0, 2.0, 3.0});
    std::vector<Label> y{B, B, M, M};

    KnnModel k1 = KnnModel::fit(x, y, {.k = 1});
    CHECK(k1.score(query1(0.1)) == -1.0);
    CHECK(k1.predict(query1(0.1)) == B);
    CHECK(k1.score(query1(2.9)) == 1.0);

    // k = 2 from the midpoint splits the vote; ties predict Malicious.
    KnnModel k2 = KnnModel::fit(x, y, {.k = 2});
    CHECK(k2.score(query1(1.5)) == 0.0);
    CHECK(k2.predict(query1(1.5)) == M);

    // k = 3 near the right end: two malicious, one benign.
    KnnModel k3 = KnnModel::fit(x, y, {.k = 3});
    CHECK(k3.score(query1(2.9)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("knn distance ties break toward the lower training index") {
    Matrix x = column({1.0, 1.0, 1.0, 2.0});
    std::vector<Label> y{M, B, M, B};
    // Three training records sit at zero distance from the query; only the
    // first k by index may vote.
    KnnModel k2 = KnnModel::fit(x, y, {.k = 2});
    CHECK(k2.score(query1(1.0)) == 0.0);  // indices 0 (M) and 1 (B)
    KnnModel k3 = KnnModel::fit(x, y, {.k = 3});
    CHECK(k3.score(query1(1.0)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("knn agrees with an exhaustive scan") {
    Dataset train = generate_synthetic(100, 1.0, 71);
    Dataset queries = generate_synthetic(50, 1.0, 72);
    for (int k : {1, 5, 10}) {
        KnnModel model = KnnModel::fit(train.x(), train.y(), {.k = k});
        Vector batch = model.score_batch(queries.x());
        for (Eigen::Index i = 0; i < queries.n_records(); ++i) {
            double want = knn_oracle(train.x(), train.y(), queries.row(i), k);
            CHECK(model.score(queries.row(i)) == want);
            CHECK(batch[i] == want);
        }
    }
}

TEST_CASE("knn rejects malformed configuration") {
    Matrix x = column({0.0, 1.0});
    std::vector<Label> y{B, M};
    CHECK_THROWS_AS(KnnModel::fit(x, y, {.k = 3}), FitError);
    CHECK_THROWS_AS(KnnModel::fit(x, y, {.k = 0}), ConfigError);
    CHECK_THROWS_AS(KnnModel::fit(Matrix(0, 1), {}, {.k = 1}), FitError);
}

TEST_CASE("naive Bayes is exactly balanced on mirror-image classes") {
    Matrix x = column({0.0, 0.25, 0.75, 1.0});
    std::vector<Label> y{B, B, M, M};
    NaiveBayesModel nb = NaiveBayesModel::fit(x, y, {});

    double s = nb.score(query1(0.5));
    CHECK(std::abs(s) < 1e-12);
    CHECK(nb.predict(query1(0.5)) == M);  // tie goes to Malicious

    auto [pb, pm] = nb.posteriors(query1(0.5));
    CHECK(pb + pm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pb == doctest::Approx(0.5).epsilon(1e-9));

    // Moving toward a class mean raises its posterior.
    CHECK(nb.score(query1(0.9)) > 0.0);
    CHECK(nb.score(query1(0.1)) < 0.0);
    auto [pb2, pm2] = nb.posteriors(query1(0.9));
    CHECK(pm2 > 0.5);
    CHECK(pb2 + pm2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("naive Bayes priors follow class proportions") {
    // Both classes share mean 0.5 and sample variance 0.5 (the malicious
    // spread is widened to offset its larger n - 1 divisor), so the
    // likelihoods cancel and the score reduces to the log prior ratio
    // log(4/2) everywhere.
    const double a = std::sqrt(0.5);
    Matrix x = column({0.0, 1.0, 0.5 - a, 0.0, 1.0, 0.5 + a});
    std::vector<Label> y{B, B, M, M, M, M};
    NaiveBayesModel nb = NaiveBayesModel::fit(x, y, {});
    CHECK(nb.score(query1(0.5)) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    auto [pb, pm] = nb.posteriors(query1(0.5));
    CHECK(pm == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("a constant feature cancels out of the naive Bayes log-odds") {
    Matrix one = column({0.0, 0.25, 0.75, 1.0});
    Matrix two(4, 2);
    two.col(0) = one.col(0);
    two.col(1).setConstant(7.0);
    std::vector<Label> y{B, B, M, M};
    NaiveBayesModel a = NaiveBayesModel::fit(one, y, {});
    NaiveBayesModel b = NaiveBayesModel::fit(two, y, {});
    RowVector q2(2);
    for (double v : {0.1, 0.5, 0.8}) {
        q2 << v, 7.0;
        CHECK(b.score(q2) == doctest::Approx(a.score(query1(v))).epsilon(1e-9));
        CHECK(std::isfinite(b.score(q2)));
    }
}

TEST_CASE("naive Bayes rejects degenerate input") {
    Matrix x = column({0.0, 1.0});
    CHECK_THROWS_AS(NaiveBayesModel::fit(x, {M, M}, {}), FitError);
    CHECK_THROWS_AS(NaiveBayesModel::fit(x, {B, M}, {.variance_floor = 0.0}), ConfigError);
    CHECK_THROWS_AS(NaiveBayesModel::fit(x, {B}, {}), ShapeError);
}

TEST_CASE("mlp analytic gradient matches central differences") {
    Dataset d = generate_synthetic(15, 1.5, 81);
    MlpParams params;
    params.hidden = 4;
    MlpModel net = MlpModel::initialize(d.n_features(), params, 7);

    Rng rng(13);
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        Vector theta = net.parameters();
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-0.8, 0.8);
        net.set_parameters(theta);
        Vector grad = net.loss_gradient(d.x(), d.y());

        // Spot-check a handful of coordinates per trial.
        for (int probe = 0; probe < 6; ++probe) {
            Eigen::Index j = static_cast<Eigen::Index>(
                rng.uniform_index(static_cast<std::size_t>(theta.size())));
            Vector up = theta, dn = theta;
            up[j] += h;
            dn[j] -= h;
            net.set_parameters(up);
            double fu = net.loss(d.x(), d.y());
            net.set_parameters(dn);
            double fd = net.loss(d.x(), d.y());
            net.set_parameters(theta);
            double fdiff = (fu - fd) / (2.0 * h);
            double denom = std::max({std::abs(grad[j]), std::abs(fdiff), 1e-8});
            CHECK(std::abs(grad[j] - fdiff) / denom < 1e-5);
        }
    }
}

TEST_CASE("mlp training reduces the loss and separates easy data") {
    Dataset d = min_max_scale(generate_synthetic(40, 3.0, 91));
    MlpParams params;
    params.hidden = 5;
    params.max_iterations = 500;

    MlpModel fresh = MlpModel::initialize(d.n_features(), params, 11);
    double before = fresh.loss(d.x(), d.y());
    MlpModel fitted = MlpModel::fit(d.x(), d.y(), params, 11);
    CHECK(fitted.loss(d.x(), d.y()) < before);

    int correct = 0;
    for (Eigen::Index i = 0; i < d.n_records(); ++i)
        if (fitted.predict(d.row(i)) == d.label(i)) ++correct;
    CHECK(correct >= 72);  // at least 90% of 80

    MlpModel again = MlpModel::fit(d.x(), d.y(), params, 11);
    for (Eigen::Index i = 0; i < d.n_records(); ++i)
        CHECK(fitted.score(d.row(i)) == again.score(d.row(i)));
}

TEST_CASE("mlp parameter round trip and validation") {
    MlpParams params;
    params.hidden = 3;
    MlpModel net = MlpModel::initialize(6, params, 42);
    Vector theta = net.parameters();
    CHECK(theta.size() == 3 * 6 + 3 + 3 + 1);
    MlpModel other = MlpModel::initialize(6, params, 43);
    other.set_parameters(theta);
    CHECK(other.parameters() == theta);
    CHECK_THROWS_AS(net.set_parameters(Vector::Zero(5)), ShapeError);

    Matrix x = column({0.0, 1.0});
    std::vector<Label> y{B, M};
    MlpParams bad;
    bad.hidden = 0;
    CHECK_THROWS_AS(MlpModel::fit(x, y, bad, 1), ConfigError);
    MlpParams neg;
    neg.max_iterations = -1;
    CHECK_THROWS_AS(MlpModel::fit(x, y, neg, 1), ConfigError);
}

TEST_CASE("svm on two points matches the closed-form dual solution") {
    Matrix x = column({0.0, 1.0});
    std::vector<Label> y{B, M};
    SvmParams params;  // gamma 0.5, C 8
    SvmModel::FitDiagnostics diag;
    SvmModel model = SvmModel::fit(x, y, params, &diag);

    // With y0 != y1 the equality constraint forces alpha0 = alpha1 = a and
    // the dual reduces to a^2 (1 - K01) - 2a, minimised at a = 1/(1 - K01).
    const double k01 = std::exp(-0.5);
    const double a_star = 1.0 / (1.0 - k01);
    REQUIRE(diag.alpha.size() == 2);
    CHECK(diag.alpha[0] == doctest::Approx(a_star).epsilon(1e-6));
    CHECK(diag.alpha[1] == doctest::Approx(a_star).epsilon(1e-6));
    CHECK(diag.objective == doctest::Approx(-a_star).epsilon(1e-6));
    CHECK(model.bias() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(model.n_support() == 2);

    // The midpoint is equidistant from both support vectors.
    CHECK(model.score(query1(0.5)) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(model.predict(query1(0.5)) == M);
    CHECK(model.score(query1(1.0)) > 0.0);
    CHECK(model.score(query1(0.0)) < 0.0);
}

TEST_CASE("svm with conflicting duplicates saturates at the box") {
    Matrix x = column({0.5, 0.5});
    std::vector<Label> y{B, M};
    SvmModel::FitDiagnostics diag;
    SvmModel model = SvmModel::fit(x, y, {}, &diag);
    CHECK(diag.alpha[0] == 8.0);
    CHECK(diag.alpha[1] == 8.0);
    CHECK(model.bias() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(model.score(query1(0.5)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("svm satisfies the KKT stopping conditions on random data") {
    for (std::uint64_t seed : {101, 102, 103}) {
        Dataset d = min_max_scale(generate_synthetic(25, 1.0, seed));
        SvmParams params;
        SvmModel::FitDiagnostics diag;
        SvmModel model = SvmModel::fit(d.x(), d.y(), params, &diag);

        CHECK(diag.kkt_violation <= params.tol);
        for (Eigen::Index i = 0; i < diag.alpha.size(); ++i) {
            CHECK(diag.alpha[i] >= 0.0);
            CHECK(diag.alpha[i] <= params.c);
        }
        // Each working-set step solves its two-variable subproblem exactly,
        // so the dual objective never rises along the trace.
        for (std::size_t i = 1; i < diag.objective_trace.size(); ++i)
            CHECK(diag.objective_trace[i] <= diag.objective_trace[i - 1] + 1e-12);
        CHECK(model.n_support() == (diag.alpha.array() > 0.0).count());
    }
}

TEST_CASE("svm rejects malformed input and reports non-convergence") {
    Matrix x = column({0.0, 1.0});
    std::vector<Label> y{B, M};
    CHECK_THROWS_AS(SvmModel::fit(column({1.0}), {M}, {}), FitError);
    CHECK_THROWS_AS(SvmModel::fit(x, {M, M}, {}), FitError);
    SvmParams bad;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(SvmModel::fit(x, y, bad), ConfigError);
    bad = {};
    bad.c = -1.0;
    CHECK_THROWS_AS(SvmModel::fit(x, y, bad), ConfigError);
    bad = {};
    bad.tol = 0.0;
    CHECK_THROWS_AS(SvmModel::fit(x, y, bad), ConfigError);

    Dataset d = min_max_scale(generate_synthetic(30, 0.5, 5));
    SvmParams strangled;
    strangled.max_steps = 1;
    CHECK_THROWS_AS(SvmModel::fit(d.x(), d.y(), strangled), ConvergenceError);
}

TEST_CASE("svm batch scoring matches single-row scoring") {
    Dataset d = min_max_scale(generate_synthetic(20, 1.5, 61));
    SvmModel model = SvmModel::fit(d.x(), d.y(), {});
    Vector batch = model.score_batch(d.x());
    for (Eigen::Index i = 0; i < d.n_records(); ++i)
        CHECK(batch[i] == doctest::Approx(model.score(d.row(i))).epsilon(1e-12));
}
