#pragma once

#include <vector>

#include "maldom/model.hpp"
#include "maldom/types.hpp"

namespace maldom {

struct NaiveBayesParams {
    double variance_floor = 1e-9;
};

/// Gaussian naive Bayes: per-class, per-feature normal densities with
/// class-proportion priors. The score is the posterior log-odds
/// log P(malicious | x) - log P(benign | x).
class NaiveBayesModel final : public Model {
public:
    static NaiveBayesModel fit(const Matrix& x, const std::vector<Label>& y,
                               const NaiveBayesParams& params);

    double score(RowRef x) const override;
    Eigen::Index n_features() const override { return mean_mal_.size(); }
    std::string family_name() const override { return "bayes"; }
    void save(std::ostream& out) const override;
    static NaiveBayesModel load(std::istream& in);

    /// {P(benign | x), P(malicious | x)}; the pair sums to 1.
    std::pair<double, double> posteriors(RowRef x) const;

private:
    Vector mean_ben_, var_ben_, mean_mal_, var_mal_;
    double log_prior_ben_ = 0.0, log_prior_mal_ = 0.0;
};

}  // namespace maldom
