#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "maldom/knn.hpp"
#include "maldom/mlp.hpp"
#include "maldom/model.hpp"
#include "maldom/naive_bayes.hpp"
#include "maldom/svm.hpp"
#include "maldom/tree.hpp"
#include "maldom/types.hpp"

namespace maldom {

struct C45Params {
    double prune_confidence = 0.05;
    int min_leaf = 2;
    std::optional<int> max_depth;
};

using ClassifierSpec =
    std::variant<MlpParams, SvmParams, C45Params, KnnParams, NaiveBayesParams>;

/// Fits the single-model family selected by the spec. The seed feeds model
/// initialisation where the family uses randomness (currently only the MLP);
/// the other families are deterministic and ignore it.
TrainedModel fit_classifier(const ClassifierSpec& spec, const Matrix& x,
                            const std::vector<Label>& y, std::uint64_t seed);

DecisionTree fit_c45(const Matrix& x, const std::vector<Label>& y, const C45Params& params);

}  // namespace maldom
