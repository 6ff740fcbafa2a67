#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "maldom/dataset.hpp"
#include "maldom/model.hpp"
#include "maldom/random.hpp"
#include "maldom/types.hpp"

namespace maldom {

/// Gain ratio of a binary split, entropies in bits:
/// (entropy(parent) - weighted child entropy) / split information.
/// Returns 0 when the split information is 0.
double gain_ratio(const std::vector<Label>& left, const std::vector<Label>& right);

/// Number of additional misclassifications predicted by the pessimistic
/// (upper confidence bound) error estimate for a leaf covering n records
/// of which e are misclassified.
double pessimistic_extra_errors(double n, double e, double confidence);

struct TreeNode {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0; // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double weight_malicious = 0.0;
    double weight_total = 0.0;
    int n_records = 0;
    int n_errors = 0;       // training records not matching the majority label
    double value = 0.0;     // classification: 2 p(malicious) - 1; regression: leaf value
};

struct TreeGrowth {
    int min_leaf = 2;                 // minimum records per child
    std::optional<int> max_depth;     // empty = unlimited
    double prune_confidence = 0.0;    // 0 disables pessimistic pruning
    int mtry = 0;                     // features per split; 0 = all
};

/// Binary classification tree over continuous features: threshold splits at
/// midpoints between adjacent distinct values, chosen by gain ratio.
/// Accepts per-record sample weights for boosting. When mtry > 0 a fresh
/// random feature subset is drawn at every split from the provided stream.
class DecisionTree final : public Model {
public:
    static DecisionTree fit(const Matrix& x, const std::vector<Label>& y,
                            const Vector& sample_weights, const TreeGrowth& growth,
                            Rng* feature_rng = nullptr);

    double score(RowRef x) const override;
    Eigen::Index n_features() const override { return n_features_; }
    std::string family_name() const override { return "c45"; }
    void save(std::ostream& out) const override;
    static DecisionTree load(std::istream& in);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int leaf_for(RowRef x) const;
    int depth() const;

private:
    std::vector<TreeNode> nodes_;
    Eigen::Index n_features_ = 0;

    friend class RegressionTree;
};

/// Least-squares regression tree used for gradient boosting stages: splits
/// maximize the reduction in residual sum of squares, leaves hold the
/// one-step Newton value sum(r) / sum(h) (0 when sum(h) is 0).
class RegressionTree {
public:
    static RegressionTree fit(const Matrix& x, const Vector& residuals,
                              const Vector& hessians, int max_depth, int min_obs);

    /// Variant reusing per-feature sort orders (order[f] = all row indices
    /// sorted ascending by column f); boosting fits thousands of small trees
    /// against the same design matrix, so the sorts are hoisted out.
    static RegressionTree fit_presorted(const Matrix& x,
                                        const std::vector<std::vector<int>>& order,
                                        const Vector& residuals, const Vector& hessians,
                                        int max_depth, int min_obs);

    double value(RowRef x) const;
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    void save(std::ostream& out) const;
    static RegressionTree load(std::istream& in);

private:
    std::vector<TreeNode> nodes_;
    Eigen::Index n_features_ = 0;
};

}  // namespace maldom
