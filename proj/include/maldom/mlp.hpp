#pragma once

#include <vector>

#include "maldom/model.hpp"
#include "maldom/random.hpp"
#include "maldom/types.hpp"

namespace maldom {

struct MlpParams {
    int hidden = 5;
    int max_iterations = 2000;
    double l2 = 1e-4;          // weights-only penalty, 0.5 * l2 * ||W||^2
    double init_range = 0.5;   // initial weights uniform on [-init_range, init_range]
    double gradient_tol = 1e-6;
};

/// Single-hidden-layer perceptron with logistic activations on both layers,
/// trained by full-batch gradient descent with Armijo backtracking on the
/// L2-penalised mean cross-entropy. The score is the output pre-activation,
/// so score >= 0 corresponds to a predicted probability >= 0.5.
class MlpModel final : public Model {
public:
    static MlpModel fit(const Matrix& x, const std::vector<Label>& y, const MlpParams& params,
                        std::uint64_t seed);

    double score(RowRef x) const override;
    Vector score_batch(const Matrix& x) const override;
    Eigen::Index n_features() const override { return w1_.cols(); }
    std::string family_name() const override { return "ann"; }
    void save(std::ostream& out) const override;
    static MlpModel load(std::istream& in);

    /// Flattened parameter vector in the canonical packing order
    /// (w1 row-major, b1, w2, b2); used by the gradient check.
    Vector parameters() const;
    void set_parameters(const Vector& theta);

    /// Penalised loss and its gradient at the current parameters.
    double loss(const Matrix& x, const std::vector<Label>& y) const;
    Vector loss_gradient(const Matrix& x, const std::vector<Label>& y) const;

    static MlpModel initialize(Eigen::Index n_features, const MlpParams& params,
                               std::uint64_t seed);

private:
    Matrix w1_;   // hidden x features
    Vector b1_;   // hidden
    Vector w2_;   // hidden
    double b2_ = 0.0;
    double l2_ = 0.0;

    Vector raw_scores(const Matrix& x) const;
};

}  // namespace maldom
