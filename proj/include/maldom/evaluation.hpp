#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "maldom/classifiers.hpp"
#include "maldom/dataset.hpp"
#include "maldom/ensembles.hpp"
#include "maldom/model.hpp"

namespace maldom {

struct ConfusionMatrix {
    long tp = 0;
    long tn = 0;
    long fp = 0;
    long fn = 0;
    long total() const { return tp + tn + fp + fn; }
};

ConfusionMatrix confusion(const std::vector<Label>& actual, const std::vector<Label>& predicted);
ConfusionMatrix confusion(const Model& model, const Matrix& x, const std::vector<Label>& y);

/// Accuracy, precision, recall and F-measure with Malicious as the positive
/// class. A metric whose denominator is zero is undefined and left empty;
/// undefined folds are excluded from averages and counted separately.
struct MetricsReport {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f_measure;
};

MetricsReport metrics(const ConfusionMatrix& cm);
double f_measure(double precision, double recall);

/// Family name plus its parameters; the nine study models carry their
/// conventional short names (ann, svm, c45, knn, bayes, bagging, adaboost,
/// rf, gbm).
struct ModelSpec {
    std::string name;
    std::variant<ClassifierSpec, EnsembleSpec> params;
};

std::vector<ModelSpec> default_model_suite();
ModelSpec model_spec_by_name(const std::string& name);

/// Anything that turns training data and a seed into a fitted model.
using ModelFitter =
    std::function<TrainedModel(const Matrix&, const std::vector<Label>&, std::uint64_t)>;

ModelFitter fitter_for(const ModelSpec& spec, int fit_threads = 1);

struct CvOptions {
    int k = 10;
    int repeats = 10;
    std::uint64_t seed = 0;
    // An unscaled dataset is min-max scaled once, globally, before the folds
    // are cut. Setting scale_per_fold refits the scaling on each training
    // fold instead (leakage-aware mode). Already-scaled data passes through.
    bool scale_per_fold = false;
    int n_threads = 1;
};

struct FoldMetrics {
    int repeat = 0;
    int fold = 0;
    MetricsReport report;
};

/// Per-metric aggregate: fold values are averaged within each repeat, the
/// mean is the average of those repeat means and the deviation their sample
/// standard deviation (0 for a single repeat). Undefined folds are skipped;
/// defined_folds / total_folds records how many contributed.
struct MetricAggregate {
    double mean = 0.0;
    double std_dev = 0.0;
    long defined_folds = 0;
    long total_folds = 0;
    bool defined() const { return defined_folds > 0; }
};

struct CvResult {
    MetricAggregate accuracy, precision, recall, f_measure;
    std::vector<FoldMetrics> folds;
};

MetricAggregate aggregate_metric(
    const std::vector<FoldMetrics>& folds, int repeats,
    const std::function<std::optional<double>(const MetricsReport&)>& pick);

/// Repeated stratified k-fold cross-validation. Fold assignments depend only
/// on (labels, k, seed, repeat), so runs with the same options pair fold for
/// fold; fit seeds are derived per (repeat, fold).
CvResult cross_validate(const ModelFitter& fit, const Dataset& data, const CvOptions& opt);
CvResult cross_validate(const ModelSpec& spec, const Dataset& data, const CvOptions& opt);

/// As above with caller-frozen fold assignments, one per repeat.
CvResult cross_validate_with_folds(const ModelFitter& fit, const Dataset& data,
                                   const std::vector<FoldAssignment>& folds,
                                   const CvOptions& opt);

std::vector<FoldAssignment> cv_fold_plan(const Dataset& data, const CvOptions& opt);

/// One grid candidate and its cross-validated mean F-measure.
struct TuneEntry {
    std::string description;
    ModelSpec spec;
    MetricAggregate f_measure;
};

struct TuneResult {
    std::vector<TuneEntry> table;
    std::size_t best = 0;  // highest mean F; ties keep the earlier grid point
};

TuneResult grid_tune(const std::vector<ModelSpec>& grid, const Dataset& data,
                     const CvOptions& opt);

std::vector<ModelSpec> default_svm_grid();
std::vector<ModelSpec> default_knn_grid();

}  // namespace maldom
