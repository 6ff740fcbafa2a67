#include <doctest.h>

#include <cmath>
#include <vector>

#include "maldom/dataset.hpp"
#include "maldom/ensembles.hpp"
#include "maldom/mathutil.hpp"
#include "maldom/random.hpp"

using namespace maldom;

namespace {

constexpr Label B = Label::Benign;
constexpr Label M = Label::Malicious;

// Two uniform features; malicious above the anti-diagonal. No single
// axis-aligned stump separates this well, but boosted stumps do.
void diagonal_data(int n, std::uint64_t seed, Matrix& x, std::vector<Label>& y) {
    Rng rng(seed);
    x.resize(n, 2);
    y.clear();
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.u01();
        x(i, 1) = rng.u01();
        y.push_back(x(i, 0) + x(i, 1) > 1.0 ? M : B);
    }
}

double train_accuracy(const Model& model, const Matrix& x, const std::vector<Label>& y) {
    int correct = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (model.predict(x.row(i)) == y[static_cast<std::size_t>(i)]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("adaboost keeps a single capped learner when one stump is perfect") {
    Matrix x(4, 1);
    x << 0.0, 1.0, 2.0, 3.0;
    std::vector<Label> y{B, B, M, M};
    TrainedModel model = fit_ensemble(AdaBoostParams{.n_learners = 10, .max_depth = 1}, x, y, 1);
    const auto* voted = dynamic_cast<const VotedEnsemble*>(model.get());
    REQUIRE(voted != nullptr);
    REQUIRE(voted->trees().size() == 1);
    CHECK(voted->weights()[0] == 13.815510557964274);  // ln(1e6)
    RowVector q(1);
    q << 0.3;
    CHECK(model->score(q) == -1.0);
    q << 2.6;
    CHECK(model->score(q) == 1.0);
}

TEST_CASE("adaboost on xor stumps keeps nothing and falls back to the base rate") {
    // No depth-1 stump gains anything on xor, so the first learner is a
    // tied single leaf that predicts Malicious everywhere; its weighted
    // error is exactly 1/2 and boosting stops with an empty ensemble.
    Matrix x(4, 2);
    x << 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0;
    std::vector<Label> y{B, M, M, B};
    TrainedModel model = fit_ensemble(AdaBoostParams{.n_learners = 25, .max_depth = 1}, x, y, 3);
    const auto* voted = dynamic_cast<const VotedEnsemble*>(model.get());
    REQUIRE(voted != nullptr);
    CHECK(voted->trees().empty());
    // Balanced classes: fallback score 2 * 1/2 - 1 = 0, a Malicious tie.
    CHECK(model->score(x.row(0)) == 0.0);
    CHECK(model->predict(x.row(0)) == M);
}

TEST_CASE("an empty ensemble scores the stored base rate") {
    VotedEnsemble lonely("adaboost", 2, {}, {}, -0.5);
    RowVector q(2);
    q << 0.1, 0.9;
    CHECK(lonely.score(q) == -0.5);
    CHECK(lonely.predict(q) == B);
    CHECK_THROWS_AS(VotedEnsemble("bagging", 2, {}, {1.0}, 0.0), ShapeError);
}

TEST_CASE("boosted stumps beat a single stump on diagonal data") {
    Matrix x;
    std::vector<Label> y;
    diagonal_data(120, 17, x, y);
    TrainedModel one = fit_ensemble(AdaBoostParams{.n_learners = 1, .max_depth = 1}, x, y, 5);
    TrainedModel many = fit_ensemble(AdaBoostParams{.n_learners = 40, .max_depth = 1}, x, y, 5);
    double acc_one = train_accuracy(*one, x, y);
    double acc_many = train_accuracy(*many, x, y);
    CHECK(acc_many > acc_one);
    CHECK(acc_many >= 0.9);
}

TEST_CASE("gbm starts from the prior log-odds") {
    Matrix x(10, 1);
    std::vector<Label> y;
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = static_cast<double>(i);
        y.push_back(i == 0 ? B : M);  // nine malicious, one benign
    }
    TrainedModel model = fit_ensemble(GbmParams{.n_trees = 0}, x, y, 1);
    const auto* gbm = dynamic_cast<const GbmModel*>(model.get());
    REQUIRE(gbm != nullptr);
    CHECK(gbm->f0() == doctest::Approx(std::log(9.0)).epsilon(1e-12));
    CHECK(gbm->deviance_trace().empty());
    RowVector q(1);
    q << 4.2;
    CHECK(model->score(q) == gbm->f0());
}

TEST_CASE("gbm deviance trace never rises and the fit separates easy data") {
    Dataset d = min_max_scale(generate_synthetic(30, 2.0, 27));
    GbmParams params{.n_trees = 100, .min_obs = 5, .shrinkage = 0.1, .depth = 2};
    TrainedModel model = fit_ensemble(params, d.x(), d.y(), 9);
    const auto* gbm = dynamic_cast<const GbmModel*>(model.get());
    REQUIRE(gbm != nullptr);
    const auto& trace = gbm->deviance_trace();
    REQUIRE(trace.size() == 100);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
    CHECK(trace.back() < trace.front());
    CHECK(train_accuracy(*model, d.x(), d.y()) >= 0.9);

    Vector batch = model->score_batch(d.x());
    for (Eigen::Index i = 0; i < d.n_records(); ++i)
        CHECK(batch[i] == model->score(d.row(i)));
}

TEST_CASE("bernoulli deviance matches the log-likelihood form") {
    Rng rng(31);
    Vector f(20);
    std::vector<Label> y;
    for (int i = 0; i < 20; ++i) {
        f[i] = rng.uniform(-4.0, 4.0);
        y.push_back(rng.u01() < 0.5 ? M : B);
    }
    // Independent arithmetic path: -2/n sum[y log p + (1-y) log(1-p)].
    double want = 0.0;
    for (int i = 0; i < 20; ++i) {
        double p = 1.0 / (1.0 + std::exp(-f[i]));
        double yi = y[static_cast<std::size_t>(i)] == M ? 1.0 : 0.0;
        want -= yi * std::log(p) + (1.0 - yi) * std::log(1.0 - p);
    }
    want *= 2.0 / 20.0;
    CHECK(bernoulli_deviance(f, y) == doctest::Approx(want).epsilon(1e-12));

    // At f = 0 the deviance is 2 log 2 regardless of the labels.
    CHECK(bernoulli_deviance(Vector::Zero(20), y) == doctest::Approx(2.0 * std::log(2.0)));

    Vector r = gbm_pseudo_residuals(f, y);
    for (int i = 0; i < 20; ++i) {
        double yi = y[static_cast<std::size_t>(i)] == M ? 1.0 : 0.0;
        CHECK(r[i] == doctest::Approx(yi - sigmoid(f[i])).epsilon(1e-15));
    }

    CHECK_THROWS_AS(bernoulli_deviance(Vector::Zero(3), y), ShapeError);
    CHECK_THROWS_AS(gbm_pseudo_residuals(Vector::Zero(3), y), ShapeError);
}

TEST_CASE("a forest offered every feature is plain bagging") {
    Dataset d = min_max_scale(generate_synthetic(40, 1.0, 47));
    TrainedModel forest = fit_ensemble(
        RandomForestParams{.n_trees = 20, .mtry = 16, .bootstrap = true}, d.x(), d.y(), 77);
    TrainedModel bags =
        fit_ensemble(BaggingParams{.n_learners = 20, .max_depth = 0}, d.x(), d.y(), 77);
    CHECK(forest->family_name() == "rf");
    CHECK(bags->family_name() == "bagging");
    for (Eigen::Index i = 0; i < d.n_records(); ++i)
        CHECK(forest->score(d.row(i)) == bags->score(d.row(i)));
}

TEST_CASE("a forest without bootstrap or feature sampling collapses to one tree") {
    Dataset d = min_max_scale(generate_synthetic(30, 1.0, 53));
    TrainedModel many = fit_ensemble(
        RandomForestParams{.n_trees = 5, .mtry = 16, .bootstrap = false}, d.x(), d.y(), 1);
    TrainedModel one = fit_ensemble(
        RandomForestParams{.n_trees = 1, .mtry = 16, .bootstrap = false}, d.x(), d.y(), 2);
    for (Eigen::Index i = 0; i < d.n_records(); ++i)
        CHECK(many->score(d.row(i)) == one->score(d.row(i)));
}

TEST_CASE("ensemble fits are deterministic and thread-count invariant") {
    Dataset d = min_max_scale(generate_synthetic(25, 1.0, 67));
    std::vector<EnsembleSpec> specs{
        BaggingParams{.n_learners = 15, .max_depth = 4},
        AdaBoostParams{.n_learners = 10, .max_depth = 2},
        RandomForestParams{.n_trees = 15, .mtry = 4, .bootstrap = true},
        GbmParams{.n_trees = 40, .min_obs = 5, .shrinkage = 0.1, .depth = 1},
    };
    for (const EnsembleSpec& spec : specs) {
        TrainedModel serial = fit_ensemble(spec, d.x(), d.y(), 21, 1);
        TrainedModel again = fit_ensemble(spec, d.x(), d.y(), 21, 1);
        TrainedModel threaded = fit_ensemble(spec, d.x(), d.y(), 21, 4);
        for (Eigen::Index i = 0; i < d.n_records(); ++i) {
            CHECK(serial->score(d.row(i)) == again->score(d.row(i)));
            CHECK(serial->score(d.row(i)) == threaded->score(d.row(i)));
        }
    }
    TrainedModel other = fit_ensemble(specs[0], d.x(), d.y(), 22, 1);
    bool any_difference = false;
    for (Eigen::Index i = 0; i < d.n_records() && !any_difference; ++i)
        any_difference = other->score(d.row(i)) !=
                         fit_ensemble(specs[0], d.x(), d.y(), 21, 1)->score(d.row(i));
    CHECK(any_difference);
}

TEST_CASE("ensemble configuration is validated") {
    Matrix x(4, 1);
    x << 0.0, 1.0, 2.0, 3.0;
    std::vector<Label> y{B, B, M, M};
    CHECK_THROWS_AS(fit_ensemble(BaggingParams{.n_learners = 0}, x, y, 1), ConfigError);
    CHECK_THROWS_AS(fit_ensemble(AdaBoostParams{.n_learners = 0}, x, y, 1), ConfigError);
    CHECK_THROWS_AS(fit_ensemble(RandomForestParams{.n_trees = 5, .mtry = 0}, x, y, 1),
                    ConfigError);
    CHECK_THROWS_AS(fit_ensemble(GbmParams{.n_trees = -1}, x, y, 1), ConfigError);
    CHECK_THROWS_AS(fit_ensemble(GbmParams{.n_trees = 1, .shrinkage = 0.0}, x, y, 1),
                    ConfigError);
    CHECK_THROWS_AS(fit_ensemble(GbmParams{.n_trees = 1}, x, {M, M, M, M}, 1), FitError);
    CHECK_THROWS_AS(fit_ensemble(BaggingParams{}, Matrix(0, 1), {}, 1), FitError);
}
