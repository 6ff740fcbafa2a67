#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace maldom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using RowRef = Eigen::Ref<const Eigen::RowVectorXd>;

/// Malicious is the positive class throughout.
enum class Label : int { Benign = 0, Malicious = 1 };

inline const char* to_string(Label l) {
    return l == Label::Malicious ? "malicious" : "benign";
}

inline double label_sign(Label l) { return l == Label::Malicious ? 1.0 : -1.0; }
inline double label01(Label l) { return l == Label::Malicious ? 1.0 : 0.0; }

}  // namespace maldom
