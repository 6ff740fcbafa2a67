#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "maldom/model.hpp"
#include "maldom/tree.hpp"
#include "maldom/types.hpp"

namespace maldom {

struct BaggingParams {
    int n_learners = 100;
    int max_depth = 5;  // <= 0 grows unlimited trees
};

struct AdaBoostParams {
    int n_learners = 100;
    int max_depth = 3;
};

struct RandomForestParams {
    int n_trees = 1000;
    int mtry = 4;
    bool bootstrap = true;
};

struct GbmParams {
    int n_trees = 5000;
    int min_obs = 10;
    double shrinkage = 0.1;
    int depth = 1;
};

using EnsembleSpec = std::variant<BaggingParams, AdaBoostParams, RandomForestParams, GbmParams>;

/// Mean Bernoulli deviance of log-odds scores f against labels:
/// 2/n * sum(softplus(f_i) - y_i f_i) with y in {0, 1}.
double bernoulli_deviance(const Vector& f, const std::vector<Label>& y);

/// Negative half-deviance gradient y - sigmoid(f): the working response each
/// boosting stage fits its regression tree to.
Vector gbm_pseudo_residuals(const Vector& f, const std::vector<Label>& y);

/// Weighted majority vote over classification trees; covers bagging, random
/// forests (unit weights) and boosting (stage weights). The score is the
/// normalised signed vote sum, so an exactly split vote predicts Malicious.
class VotedEnsemble final : public Model {
public:
    VotedEnsemble(std::string family, Eigen::Index n_features, std::vector<DecisionTree> trees,
                  std::vector<double> weights, double fallback_score);

    double score(RowRef x) const override;
    Eigen::Index n_features() const override { return n_features_; }
    std::string family_name() const override { return family_; }
    void save(std::ostream& out) const override;
    static VotedEnsemble load(std::istream& in);

    const std::vector<DecisionTree>& trees() const { return trees_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::string family_;
    Eigen::Index n_features_ = 0;
    std::vector<DecisionTree> trees_;
    std::vector<double> weights_;
    double fallback_score_ = 0.0;  // used when boosting kept no learner
};

/// Stagewise additive model for the Bernoulli deviance: the score is the
/// log-odds f0 + shrinkage * sum of regression-stump values.
class GbmModel final : public Model {
public:
    GbmModel(Eigen::Index n_features, double f0, double shrinkage,
             std::vector<RegressionTree> trees, std::vector<double> deviance_trace);

    double score(RowRef x) const override;
    Vector score_batch(const Matrix& x) const override;
    Eigen::Index n_features() const override { return n_features_; }
    std::string family_name() const override { return "gbm"; }
    void save(std::ostream& out) const override;
    static GbmModel load(std::istream& in);

    double f0() const { return f0_; }
    /// Mean Bernoulli deviance on the training data after each stage.
    const std::vector<double>& deviance_trace() const { return deviance_trace_; }

private:
    Eigen::Index n_features_ = 0;
    double f0_ = 0.0;
    double shrinkage_ = 0.0;
    std::vector<RegressionTree> trees_;
    std::vector<double> deviance_trace_;
};

/// Fits the ensemble family selected by the spec. Bootstrap and feature
/// subsampling streams are derived per member from the seed, so results do
/// not depend on n_threads.
TrainedModel fit_ensemble(const EnsembleSpec& spec, const Matrix& x, const std::vector<Label>& y,
                          std::uint64_t seed, int n_threads = 1);

}  // namespace maldom
