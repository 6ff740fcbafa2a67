#pragma once

#include <vector>

#include "maldom/model.hpp"
#include "maldom/types.hpp"

namespace maldom {

struct KnnParams {
    int k = 10;
};

/// k-nearest-neighbour vote over Euclidean distance. The score is the signed
/// vote margin (malicious - benign) / k, so an even split predicts Malicious.
/// Distance ties at the cut-off are broken toward the lower training index.
class KnnModel final : public Model {
public:
    static KnnModel fit(const Matrix& x, const std::vector<Label>& y, const KnnParams& params);

    double score(RowRef x) const override;
    Vector score_batch(const Matrix& x) const override;
    Eigen::Index n_features() const override { return train_.cols(); }
    std::string family_name() const override { return "knn"; }
    void save(std::ostream& out) const override;
    static KnnModel load(std::istream& in);

    int k() const { return k_; }

private:
    Matrix train_;
    Vector sq_norms_;
    std::vector<Label> labels_;
    int k_ = 0;

    double vote_from_sq_dists(const Vector& sq) const;
};

}  // namespace maldom
