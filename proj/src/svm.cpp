#include "maldom/svm.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "maldom/serialize.hpp"

namespace maldom {

namespace {

Matrix rbf_kernel(const Matrix& a, const Vector& a_sq, const Matrix& b, const Vector& b_sq,
                  double gamma) {
    Matrix k = -2.0 * (a * b.transpose());
    k.colwise() += a_sq;
    k.rowwise() += b_sq.transpose();
    return (-gamma * k.array()).exp();
}

}  // namespace

SvmModel SvmModel::fit(const Matrix& x, const std::vector<Label>& y, const SvmParams& params,
                       FitDiagnostics* diagnostics) {
    const Eigen::Index n = x.rows();
    if (n < 2) throw FitError("svm needs at least two training records");
    if (static_cast<Eigen::Index>(y.size()) != n)
        throw ShapeError("labels must match the record count");
    if (params.gamma <= 0.0) throw ConfigError("gamma must be positive");
    if (params.c <= 0.0) throw ConfigError("C must be positive");
    if (params.tol <= 0.0) throw ConfigError("tolerance must be positive");
    const double c = params.c;

    Vector ys(n);
    for (Eigen::Index i = 0; i < n; ++i) ys[i] = label_sign(y[static_cast<std::size_t>(i)]);
    if (ys.minCoeff() == ys.maxCoeff())
        throw FitError("svm needs training records from both classes");

    Vector sq = x.rowwise().squaredNorm();
    Matrix kernel = rbf_kernel(x, sq, x, sq, params.gamma);

    Vector alpha = Vector::Zero(n);
    Vector f = Vector::Zero(n);  // f_t = sum_s alpha_s y_s K(s, t)
    const double snap = 1e-12 * std::max(1.0, c);

    auto objective = [&] {
        // 0.5 a'Qa - sum(a) with (Qa)_t = y_t f_t.
        return 0.5 * alpha.dot(ys.cwiseProduct(f)) - alpha.sum();
    };

    std::int64_t steps = 0;
    double violation = 0.0;
    while (true) {
        // Maximal violating pair over g_t = y_t - f_t.
        int i = -1, j = -1;
        double m = -std::numeric_limits<double>::infinity();
        double big_m = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            double g = ys[t] - f[t];
            bool in_up = ys[t] > 0.0 ? alpha[t] < c : alpha[t] > 0.0;
            bool in_low = ys[t] > 0.0 ? alpha[t] > 0.0 : alpha[t] < c;
            if (in_up && g > m) {
                m = g;
                i = static_cast<int>(t);
            }
            if (in_low && g < big_m) {
                big_m = g;
                j = static_cast<int>(t);
            }
        }
        violation = m - big_m;
        if (i < 0 || j < 0 || violation <= params.tol) break;
        if (steps >= params.max_steps)
            throw ConvergenceError("svm failed to reach the KKT tolerance within " +
                                   std::to_string(params.max_steps) + " steps");

        double eta = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
        double delta = violation / std::max(eta, 1e-12);
        // alpha_i moves by y_i * delta and alpha_j by -y_j * delta, which
        // preserves sum(alpha .* y); clip delta to keep both in [0, C].
        double room_i = ys[i] > 0.0 ? c - alpha[i] : alpha[i];
        double room_j = ys[j] > 0.0 ? alpha[j] : c - alpha[j];
        delta = std::min({delta, room_i, room_j});

        double old_i = alpha[i], old_j = alpha[j];
        alpha[i] += ys[i] * delta;
        alpha[j] -= ys[j] * delta;
        for (Eigen::Index t : {Eigen::Index(i), Eigen::Index(j)}) {
            if (alpha[t] < snap) alpha[t] = 0.0;
            if (alpha[t] > c - snap) alpha[t] = c;
        }
        f += kernel.col(i) * (ys[i] * (alpha[i] - old_i)) +
             kernel.col(j) * (ys[j] * (alpha[j] - old_j));
        ++steps;
        if (diagnostics) diagnostics->objective_trace.push_back(objective());
    }

    // Bias from the free support vectors; with none, split the KKT gap.
    double free_sum = 0.0;
    Eigen::Index free_count = 0;
    for (Eigen::Index t = 0; t < n; ++t)
        if (alpha[t] > 0.0 && alpha[t] < c) {
            free_sum += ys[t] - f[t];
            ++free_count;
        }
    double bias;
    if (free_count > 0) {
        bias = free_sum / static_cast<double>(free_count);
    } else {
        double m = -std::numeric_limits<double>::infinity();
        double big_m = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            double g = ys[t] - f[t];
            bool in_up = ys[t] > 0.0 ? alpha[t] < c : alpha[t] > 0.0;
            bool in_low = ys[t] > 0.0 ? alpha[t] > 0.0 : alpha[t] < c;
            if (in_up) m = std::max(m, g);
            if (in_low) big_m = std::min(big_m, g);
        }
        bias = (m + big_m) / 2.0;
    }

    if (diagnostics) {
        diagnostics->alpha = alpha;
        diagnostics->objective = objective();
        diagnostics->kkt_violation = violation;
        diagnostics->steps = steps;
    }

    Eigen::Index n_sv = (alpha.array() > 0.0).count();
    SvmModel model;
    model.support_.resize(n_sv, x.cols());
    model.coeff_.resize(n_sv);
    Eigen::Index at = 0;
    for (Eigen::Index t = 0; t < n; ++t)
        if (alpha[t] > 0.0) {
            model.support_.row(at) = x.row(t);
            model.coeff_[at] = alpha[t] * ys[t];
            ++at;
        }
    model.support_sq_norms_ = model.support_.rowwise().squaredNorm();
    model.gamma_ = params.gamma;
    model.bias_ = bias;
    return model;
}

double SvmModel::score(RowRef x) const {
    check_dim(x);
    if (support_.rows() == 0) return bias_;
    Vector sq_dist = support_sq_norms_ - 2.0 * (support_ * x.transpose()) +
                     Vector::Constant(support_.rows(), x.squaredNorm());
    return coeff_.dot((-gamma_ * sq_dist.array()).exp().matrix()) + bias_;
}

Vector SvmModel::score_batch(const Matrix& x) const {
    if (x.cols() != n_features()) throw ShapeError("query width does not match the model");
    if (support_.rows() == 0) return Vector::Constant(x.rows(), bias_);
    Vector x_sq = x.rowwise().squaredNorm();
    Matrix k = rbf_kernel(support_, support_sq_norms_, x, x_sq, gamma_);
    return (k.transpose() * coeff_).array() + bias_;
}

void SvmModel::save(std::ostream& out) const {
    out << "svm " << support_.cols() << ' ' << support_.rows() << ' ';
    write_hex_double(out, gamma_);
    out << ' ';
    write_hex_double(out, bias_);
    out << '\n';
    for (Eigen::Index i = 0; i < support_.rows(); ++i) {
        write_hex_double(out, coeff_[i]);
        for (Eigen::Index f = 0; f < support_.cols(); ++f) {
            out << ' ';
            write_hex_double(out, support_(i, f));
        }
        out << '\n';
    }
}

SvmModel SvmModel::load(std::istream& in) {
    expect_tag(in, "svm");
    long d = read_long(in, "feature count");
    long n_sv = read_long(in, "support vector count");
    if (d < 1 || n_sv < 0) throw ParseError("svm header is inconsistent");
    SvmModel model;
    model.gamma_ = read_hex_double(in, "gamma");
    model.bias_ = read_hex_double(in, "bias");
    model.support_.resize(n_sv, d);
    model.coeff_.resize(n_sv);
    for (long i = 0; i < n_sv; ++i) {
        model.coeff_[i] = read_hex_double(in, "coefficient");
        for (long f = 0; f < d; ++f) model.support_(i, f) = read_hex_double(in, "support value");
    }
    model.support_sq_norms_ = model.support_.rowwise().squaredNorm();
    return model;
}

}  // namespace maldom
