#pragma once

#include <vector>

#include "maldom/model.hpp"
#include "maldom/types.hpp"

namespace maldom {

struct SvmParams {
    double gamma = 0.5;
    double c = 8.0;
    double tol = 1e-3;              // KKT violation m - M at which to stop
    std::int64_t max_steps = 1'000'000;
};

/// Soft-margin SVM with an RBF kernel, trained by sequential minimal
/// optimisation on the dual with maximal-violating-pair working-set
/// selection. The score is the decision value sum_i alpha_i y_i K(x_i, x) + b.
class SvmModel final : public Model {
public:
    /// Dual multipliers and optimality measures of a fit, exposed for tests.
    struct FitDiagnostics {
        Vector alpha;
        double objective = 0.0;      // 0.5 a'Qa - sum(a)
        double kkt_violation = 0.0;  // final m - M
        std::int64_t steps = 0;
        std::vector<double> objective_trace;  // after every optimisation step
    };

    static SvmModel fit(const Matrix& x, const std::vector<Label>& y, const SvmParams& params,
                        FitDiagnostics* diagnostics = nullptr);

    double score(RowRef x) const override;
    Vector score_batch(const Matrix& x) const override;
    Eigen::Index n_features() const override { return support_.cols(); }
    std::string family_name() const override { return "svm"; }
    void save(std::ostream& out) const override;
    static SvmModel load(std::istream& in);

    Eigen::Index n_support() const { return support_.rows(); }
    double bias() const { return bias_; }

private:
    Matrix support_;       // one support vector per row
    Vector coeff_;         // alpha_i * y_i
    Vector support_sq_norms_;
    double gamma_ = 0.0;
    double bias_ = 0.0;
};

}  // namespace maldom
