#include "maldom/classifiers.hpp"

namespace maldom {

DecisionTree fit_c45(const Matrix& x, const std::vector<Label>& y, const C45Params& params) {
    if (params.prune_confidence < 0.0 || params.prune_confidence >= 1.0)
        throw ConfigError("prune confidence must lie in [0, 1)");
    TreeGrowth growth;
    growth.min_leaf = params.min_leaf;
    growth.max_depth = params.max_depth;
    growth.prune_confidence = params.prune_confidence;
    return DecisionTree::fit(x, y, Vector::Ones(x.rows()), growth);
}

TrainedModel fit_classifier(const ClassifierSpec& spec, const Matrix& x,
                            const std::vector<Label>& y, std::uint64_t seed) {
    return std::visit(
        [&](const auto& params) -> TrainedModel {
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, MlpParams>)
                return std::make_shared<MlpModel>(MlpModel::fit(x, y, params, seed));
            else if constexpr (std::is_same_v<P, SvmParams>)
                return std::make_shared<SvmModel>(SvmModel::fit(x, y, params));
            else if constexpr (std::is_same_v<P, C45Params>)
                return std::make_shared<DecisionTree>(fit_c45(x, y, params));
            else if constexpr (std::is_same_v<P, KnnParams>)
                return std::make_shared<KnnModel>(KnnModel::fit(x, y, params));
            else
                return std::make_shared<NaiveBayesModel>(NaiveBayesModel::fit(x, y, params));
        },
        spec);
}

}  // namespace maldom
