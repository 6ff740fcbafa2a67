#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "maldom/errors.hpp"
#include "maldom/types.hpp"

namespace maldom {

/// A fitted classifier. Immutable after fit; predict and score are
/// deterministic and reentrant, so models may be shared across threads.
///
/// score follows one convention for every family: higher means more
/// malicious, and predict(x) == Malicious exactly when score(x) >= 0.
/// Ties at 0 therefore break toward the positive (Malicious) class.
class Model {
public:
    virtual ~Model() = default;

    virtual double score(RowRef x) const = 0;
    virtual Eigen::Index n_features() const = 0;
    virtual std::string family_name() const = 0;
    virtual void save(std::ostream& out) const = 0;

    Label predict(RowRef x) const {
        return score(x) >= 0.0 ? Label::Malicious : Label::Benign;
    }

    /// Batch scores; families with a vectorizable form override this.
    virtual Vector score_batch(const Matrix& x) const {
        Vector out(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = score(x.row(i));
        return out;
    }

protected:
    void check_dim(RowRef x) const {
        if (x.size() != n_features())
            throw ShapeError("query has " + std::to_string(x.size()) +
                             " features, model expects " + std::to_string(n_features()));
    }
};

using TrainedModel = std::shared_ptr<const Model>;

/// Reads back a model written by Model::save.
TrainedModel load_model(std::istream& in);
TrainedModel load_model_file(const std::string& path);
void save_model_file(const Model& model, const std::string& path);

}  // namespace maldom
