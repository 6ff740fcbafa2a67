#include "maldom/evaluation.hpp"

#include <cmath>

#include "maldom/parallel.hpp"
#include "maldom/random.hpp"

namespace maldom {

namespace {

// Sub-streams of the master seed: fold shuffles and model fits must not
// share a stream, or changing k would perturb the fold plan.
constexpr std::uint64_t kFoldStream = 1;
constexpr std::uint64_t kFitStream = 2;

std::uint64_t fold_seed(std::uint64_t master, int repeat) {
    return derive_seed(derive_seed(master, kFoldStream), static_cast<std::uint64_t>(repeat));
}

std::uint64_t fit_seed(std::uint64_t master, int repeat, int k, int fold) {
    return derive_seed(derive_seed(master, kFitStream),
                       static_cast<std::uint64_t>(repeat) * static_cast<std::uint64_t>(k) +
                           static_cast<std::uint64_t>(fold));
}

}  // namespace

ConfusionMatrix confusion(const std::vector<Label>& actual,
                          const std::vector<Label>& predicted) {
    if (actual.size() != predicted.size())
        throw ShapeError("actual and predicted labels must pair up");
    if (actual.empty()) throw ShapeError("confusion needs at least one record");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        bool pred_mal = predicted[i] == Label::Malicious;
        bool is_mal = actual[i] == Label::Malicious;
        if (pred_mal && is_mal)
            ++cm.tp;
        else if (pred_mal)
            ++cm.fp;
        else if (is_mal)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

ConfusionMatrix confusion(const Model& model, const Matrix& x, const std::vector<Label>& y) {
    if (static_cast<Eigen::Index>(y.size()) != x.rows())
        throw ShapeError("labels must match the record count");
    Vector scores = model.score_batch(x);
    std::vector<Label> predicted(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        predicted[static_cast<std::size_t>(i)] =
            scores[i] >= 0.0 ? Label::Malicious : Label::Benign;
    return confusion(y, predicted);
}

double f_measure(double precision, double recall) {
    if (precision < 0.0 || recall < 0.0) throw ConfigError("precision and recall must be >= 0");
    if (precision + recall <= 0.0)
        throw ConfigError("F-measure is undefined when precision + recall is 0");
    return 2.0 * precision * recall / (precision + recall);
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) throw ConfigError("confusion matrix is empty");
    MetricsReport r;
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fp > 0)
        r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    if (cm.tp + cm.fn > 0)
        r.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (r.precision && r.recall && *r.precision + *r.recall > 0.0)
        r.f_measure = f_measure(*r.precision, *r.recall);
    return r;
}

std::vector<ModelSpec> default_model_suite() {
    return {
        {"ann", ClassifierSpec{MlpParams{}}},
        {"svm", ClassifierSpec{SvmParams{}}},
        {"c45", ClassifierSpec{C45Params{}}},
        {"knn", ClassifierSpec{KnnParams{}}},
        {"bayes", ClassifierSpec{NaiveBayesParams{}}},
        {"bagging", EnsembleSpec{BaggingParams{}}},
        {"adaboost", EnsembleSpec{AdaBoostParams{}}},
        {"rf", EnsembleSpec{RandomForestParams{}}},
        {"gbm", EnsembleSpec{GbmParams{}}},
    };
}

ModelSpec model_spec_by_name(const std::string& name) {
    for (ModelSpec& spec : default_model_suite())
        if (spec.name == name) return spec;
    throw ConfigError("unknown model '" + name +
                      "' (expected one of ann svm c45 knn bayes bagging adaboost rf gbm)");
}

ModelFitter fitter_for(const ModelSpec& spec, int fit_threads) {
    if (const auto* single = std::get_if<ClassifierSpec>(&spec.params)) {
        ClassifierSpec params = *single;
        return [params](const Matrix& x, const std::vector<Label>& y, std::uint64_t seed) {
            return fit_classifier(params, x, y, seed);
        };
    }
    EnsembleSpec params = std::get<EnsembleSpec>(spec.params);
    return [params, fit_threads](const Matrix& x, const std::vector<Label>& y,
                                 std::uint64_t seed) {
        return fit_ensemble(params, x, y, seed, fit_threads);
    };
}

MetricAggregate aggregate_metric(
    const std::vector<FoldMetrics>& folds, int repeats,
    const std::function<std::optional<double>(const MetricsReport&)>& pick) {
    MetricAggregate agg;
    std::vector<double> repeat_means;
    for (int r = 0; r < repeats; ++r) {
        double sum = 0.0;
        long defined = 0;
        for (const FoldMetrics& fm : folds) {
            if (fm.repeat != r) continue;
            ++agg.total_folds;
            if (std::optional<double> v = pick(fm.report)) {
                sum += *v;
                ++defined;
            }
        }
        agg.defined_folds += defined;
        if (defined > 0) repeat_means.push_back(sum / static_cast<double>(defined));
    }
    if (repeat_means.empty()) return agg;
    double mean = 0.0;
    for (double m : repeat_means) mean += m;
    mean /= static_cast<double>(repeat_means.size());
    double var = 0.0;
    for (double m : repeat_means) var += (m - mean) * (m - mean);
    agg.mean = mean;
    agg.std_dev = repeat_means.size() > 1
                      ? std::sqrt(var / static_cast<double>(repeat_means.size() - 1))
                      : 0.0;
    return agg;
}

std::vector<FoldAssignment> cv_fold_plan(const Dataset& data, const CvOptions& opt) {
    if (opt.k < 2) throw ConfigError("cross validation needs k >= 2");
    if (opt.repeats < 1) throw ConfigError("cross validation needs at least one repeat");
    std::vector<FoldAssignment> plan;
    plan.reserve(static_cast<std::size_t>(opt.repeats));
    for (int r = 0; r < opt.repeats; ++r)
        plan.push_back(stratified_k_folds(data, opt.k, fold_seed(opt.seed, r)));
    return plan;
}

CvResult cross_validate_with_folds(const ModelFitter& fit, const Dataset& data,
                                   const std::vector<FoldAssignment>& folds,
                                   const CvOptions& opt) {
    if (folds.empty()) throw ConfigError("fold plan is empty");
    const int repeats = static_cast<int>(folds.size());
    const int k = folds.front().k;
    for (const FoldAssignment& fa : folds)
        if (fa.k != k || static_cast<Eigen::Index>(fa.fold.size()) != data.n_records())
            throw PairingError("fold plan does not match the dataset");

    const bool rescale = opt.scale_per_fold && !data.scaled();
    std::optional<Dataset> prescaled;
    if (!data.scaled() && !opt.scale_per_fold) prescaled = min_max_scale(data);
    const Dataset& source = prescaled ? *prescaled : data;
    std::vector<FoldMetrics> results(static_cast<std::size_t>(repeats) *
                                     static_cast<std::size_t>(k));
    parallel_for(results.size(), opt.n_threads, [&](std::size_t task) {
        int r = static_cast<int>(task) / k;
        int f = static_cast<int>(task) % k;
        const FoldAssignment& fa = folds[static_cast<std::size_t>(r)];
        Dataset train = source.select_rows(fa.train_indices(f));
        Dataset test = source.select_rows(fa.test_indices(f));
        if (rescale) {
            train = min_max_scale(train);
            test = scale_with(test, *train.scaling_params());
        }
        FoldMetrics& out = results[task];
        out.repeat = r;
        out.fold = f;
        try {
            TrainedModel model = fit(train.x(), train.y(), fit_seed(opt.seed, r, k, f));
            out.report = metrics(confusion(*model, test.x(), test.y()));
        } catch (const Error& e) {
            throw FitError("repeat " + std::to_string(r) + " fold " + std::to_string(f) + ": " +
                           e.what());
        }
    });

    CvResult cv;
    cv.folds = std::move(results);
    cv.accuracy = aggregate_metric(cv.folds, repeats,
                                   [](const MetricsReport& m) { return std::optional{m.accuracy}; });
    cv.precision =
        aggregate_metric(cv.folds, repeats, [](const MetricsReport& m) { return m.precision; });
    cv.recall =
        aggregate_metric(cv.folds, repeats, [](const MetricsReport& m) { return m.recall; });
    cv.f_measure =
        aggregate_metric(cv.folds, repeats, [](const MetricsReport& m) { return m.f_measure; });
    return cv;
}

CvResult cross_validate(const ModelFitter& fit, const Dataset& data, const CvOptions& opt) {
    return cross_validate_with_folds(fit, data, cv_fold_plan(data, opt), opt);
}

CvResult cross_validate(const ModelSpec& spec, const Dataset& data, const CvOptions& opt) {
    // Parallelism goes to the folds; fits stay sequential to avoid nesting.
    return cross_validate(fitter_for(spec, 1), data, opt);
}

TuneResult grid_tune(const std::vector<ModelSpec>& grid, const Dataset& data,
                     const CvOptions& opt) {
    if (grid.empty()) throw TuningError("tuning grid is empty");
    TuneResult result;
    result.table.reserve(grid.size());
    for (const ModelSpec& spec : grid) {
        CvResult cv = cross_validate(spec, data, opt);
        result.table.push_back({spec.name, spec, cv.f_measure});
    }
    bool any_defined = false;
    double best_f = 0.0;
    for (std::size_t i = 0; i < result.table.size(); ++i) {
        const MetricAggregate& f = result.table[i].f_measure;
        if (!f.defined()) continue;
        if (!any_defined || f.mean > best_f) {
            any_defined = true;
            best_f = f.mean;
            result.best = i;
        }
    }
    if (!any_defined)
        throw TuningError("no grid candidate produced a defined F-measure");
    return result;
}

std::vector<ModelSpec> default_svm_grid() {
    std::vector<ModelSpec> grid;
    for (int ge = -4; ge <= 2; ++ge)
        for (int ce = -1; ce <= 5; ++ce) {
            SvmParams p;
            p.gamma = std::ldexp(1.0, ge);
            p.c = std::ldexp(1.0, ce);
            std::string name =
                "svm gamma=2^" + std::to_string(ge) + " C=2^" + std::to_string(ce);
            grid.push_back({name, ClassifierSpec{p}});
        }
    return grid;
}

std::vector<ModelSpec> default_knn_grid() {
    std::vector<ModelSpec> grid;
    for (int k = 1; k <= 25; k += 2) {
        KnnParams p;
        p.k = k;
        grid.push_back({"knn k=" + std::to_string(k), ClassifierSpec{p}});
    }
    return grid;
}

}  // namespace maldom
