#include "maldom/mlp.hpp"

#include <cmath>
#include <ostream>

#include "maldom/mathutil.hpp"
#include "maldom/serialize.hpp"

namespace maldom {

namespace {

Vector labels01(const std::vector<Label>& y) {
    Vector v(static_cast<Eigen::Index>(y.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = y[static_cast<std::size_t>(i)] == Label::Malicious ? 1.0 : 0.0;
    return v;
}

}  // namespace

MlpModel MlpModel::initialize(Eigen::Index n_features, const MlpParams& params,
                              std::uint64_t seed) {
    if (n_features < 1) throw FitError("mlp needs at least one feature");
    if (params.hidden < 1) throw ConfigError("hidden layer size must be positive");
    if (params.init_range <= 0.0) throw ConfigError("init range must be positive");
    MlpModel model;
    model.l2_ = params.l2;
    model.w1_.resize(params.hidden, n_features);
    model.b1_.resize(params.hidden);
    model.w2_.resize(params.hidden);
    Rng rng(seed);
    auto draw = [&] { return rng.uniform(-params.init_range, params.init_range); };
    for (Eigen::Index h = 0; h < model.w1_.rows(); ++h)
        for (Eigen::Index f = 0; f < model.w1_.cols(); ++f) model.w1_(h, f) = draw();
    for (Eigen::Index h = 0; h < model.b1_.size(); ++h) model.b1_[h] = draw();
    for (Eigen::Index h = 0; h < model.w2_.size(); ++h) model.w2_[h] = draw();
    model.b2_ = draw();
    return model;
}

Vector MlpModel::raw_scores(const Matrix& x) const {
    Matrix a1 = ((x * w1_.transpose()).rowwise() + b1_.transpose())
                    .unaryExpr([](double v) { return sigmoid(v); });
    return (a1 * w2_).array() + b2_;
}

double MlpModel::score(RowRef x) const {
    check_dim(x);
    Vector a1 = (w1_ * x.transpose() + b1_).unaryExpr([](double v) { return sigmoid(v); });
    return w2_.dot(a1) + b2_;
}

Vector MlpModel::score_batch(const Matrix& x) const {
    if (x.cols() != n_features()) throw ShapeError("query width does not match the network");
    return raw_scores(x);
}

double MlpModel::loss(const Matrix& x, const std::vector<Label>& y) const {
    const double n = static_cast<double>(x.rows());
    Vector z = raw_scores(x);
    Vector y01 = labels01(y);
    double ce = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) ce += softplus(z[i]) - y01[i] * z[i];
    double penalty = 0.5 * l2_ * (w1_.squaredNorm() + w2_.squaredNorm());
    return ce / n + penalty;
}

Vector MlpModel::loss_gradient(const Matrix& x, const std::vector<Label>& y) const {
    const double n = static_cast<double>(x.rows());
    Matrix a1 = ((x * w1_.transpose()).rowwise() + b1_.transpose())
                    .unaryExpr([](double v) { return sigmoid(v); });
    Vector z = (a1 * w2_).array() + b2_;
    Vector delta2 = z.unaryExpr([](double v) { return sigmoid(v); }) - labels01(y);

    Vector g_w2 = a1.transpose() * delta2 / n + l2_ * w2_;
    double g_b2 = delta2.sum() / n;
    Matrix delta1 =
        (delta2 * w2_.transpose()).cwiseProduct(a1.cwiseProduct(Matrix::Ones(a1.rows(), a1.cols()) - a1));
    Matrix g_w1 = delta1.transpose() * x / n + l2_ * w1_;
    Vector g_b1 = delta1.colwise().sum().transpose() / n;

    Vector grad(w1_.size() + b1_.size() + w2_.size() + 1);
    Eigen::Index at = 0;
    for (Eigen::Index h = 0; h < g_w1.rows(); ++h)
        for (Eigen::Index f = 0; f < g_w1.cols(); ++f) grad[at++] = g_w1(h, f);
    for (Eigen::Index h = 0; h < g_b1.size(); ++h) grad[at++] = g_b1[h];
    for (Eigen::Index h = 0; h < g_w2.size(); ++h) grad[at++] = g_w2[h];
    grad[at] = g_b2;
    return grad;
}

Vector MlpModel::parameters() const {
    Vector theta(w1_.size() + b1_.size() + w2_.size() + 1);
    Eigen::Index at = 0;
    for (Eigen::Index h = 0; h < w1_.rows(); ++h)
        for (Eigen::Index f = 0; f < w1_.cols(); ++f) theta[at++] = w1_(h, f);
    for (Eigen::Index h = 0; h < b1_.size(); ++h) theta[at++] = b1_[h];
    for (Eigen::Index h = 0; h < w2_.size(); ++h) theta[at++] = w2_[h];
    theta[at] = b2_;
    return theta;
}

void MlpModel::set_parameters(const Vector& theta) {
    if (theta.size() != w1_.size() + b1_.size() + w2_.size() + 1)
        throw ShapeError("parameter vector does not match the network layout");
    Eigen::Index at = 0;
    for (Eigen::Index h = 0; h < w1_.rows(); ++h)
        for (Eigen::Index f = 0; f < w1_.cols(); ++f) w1_(h, f) = theta[at++];
    for (Eigen::Index h = 0; h < b1_.size(); ++h) b1_[h] = theta[at++];
    for (Eigen::Index h = 0; h < w2_.size(); ++h) w2_[h] = theta[at++];
    b2_ = theta[at];
}

MlpModel MlpModel::fit(const Matrix& x, const std::vector<Label>& y, const MlpParams& params,
                       std::uint64_t seed) {
    if (x.rows() < 1) throw FitError("mlp needs at least one training record");
    if (static_cast<Eigen::Index>(y.size()) != x.rows())
        throw ShapeError("labels must match the record count");
    if (params.max_iterations < 0) throw ConfigError("max iterations must be non-negative");
    if (params.l2 < 0.0) throw ConfigError("l2 penalty must be non-negative");

    MlpModel model = initialize(x.cols(), params, seed);
    double current = model.loss(x, y);
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        Vector grad = model.loss_gradient(x, y);
        double grad_sq = grad.squaredNorm();
        if (std::sqrt(grad_sq) < params.gradient_tol) break;
        Vector theta = model.parameters();
        double step = 1.0;
        bool improved = false;
        for (int half = 0; half < 40; ++half) {
            model.set_parameters(theta - step * grad);
            double trial = model.loss(x, y);
            if (trial <= current - 1e-4 * step * grad_sq) {
                current = trial;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            model.set_parameters(theta);
            break;
        }
    }
    return model;
}

void MlpModel::save(std::ostream& out) const {
    out << "ann " << w1_.cols() << ' ' << w1_.rows() << ' ';
    write_hex_double(out, l2_);
    out << '\n';
    Vector theta = parameters();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (i) out << ' ';
        write_hex_double(out, theta[i]);
    }
    out << '\n';
}

MlpModel MlpModel::load(std::istream& in) {
    expect_tag(in, "ann");
    long d = read_long(in, "feature count");
    long h = read_long(in, "hidden size");
    if (d < 1 || h < 1) throw ParseError("ann header is inconsistent");
    MlpModel model;
    model.l2_ = read_hex_double(in, "l2 penalty");
    model.w1_.resize(h, d);
    model.b1_.resize(h);
    model.w2_.resize(h);
    Vector theta(model.w1_.size() + model.b1_.size() + model.w2_.size() + 1);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = read_hex_double(in, "parameter");
    model.set_parameters(theta);
    return model;
}

}  // namespace maldom
