#include "maldom/naive_bayes.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "maldom/serialize.hpp"

namespace maldom {

namespace {

// Per-feature mean and unbiased variance of the rows with the given label.
void class_moments(const Matrix& x, const std::vector<Label>& y, Label which, double floor,
                   Vector& mean, Vector& var, double& count) {
    const Eigen::Index d = x.cols();
    mean = Vector::Zero(d);
    var = Vector::Zero(d);
    count = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (y[static_cast<std::size_t>(i)] == which) {
            mean += x.row(i).transpose();
            count += 1.0;
        }
    mean /= count;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (y[static_cast<std::size_t>(i)] == which)
            var += (x.row(i).transpose() - mean).cwiseAbs2();
    var /= std::max(count - 1.0, 1.0);
    var = var.cwiseMax(floor);
}

double log_likelihood(RowRef x, const Vector& mean, const Vector& var) {
    double ll = -0.5 * x.size() * std::log(2.0 * std::numbers::pi);
    for (Eigen::Index f = 0; f < x.size(); ++f) {
        double diff = x[f] - mean[f];
        ll -= 0.5 * (std::log(var[f]) + diff * diff / var[f]);
    }
    return ll;
}

void save_vector(std::ostream& out, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        write_hex_double(out, v[i]);
    }
    out << '\n';
}

Vector load_vector(std::istream& in, long d) {
    Vector v(d);
    for (long i = 0; i < d; ++i) v[i] = read_hex_double(in, "moment value");
    return v;
}

}  // namespace

NaiveBayesModel NaiveBayesModel::fit(const Matrix& x, const std::vector<Label>& y,
                                     const NaiveBayesParams& params) {
    if (static_cast<Eigen::Index>(y.size()) != x.rows())
        throw ShapeError("labels must match the record count");
    if (params.variance_floor <= 0.0) throw ConfigError("variance floor must be positive");
    NaiveBayesModel model;
    double n_ben = 0.0, n_mal = 0.0;
    for (Label lab : y) (lab == Label::Malicious ? n_mal : n_ben) += 1.0;
    if (n_ben == 0.0 || n_mal == 0.0)
        throw FitError("naive Bayes needs training records from both classes");
    class_moments(x, y, Label::Benign, params.variance_floor, model.mean_ben_, model.var_ben_,
                  n_ben);
    class_moments(x, y, Label::Malicious, params.variance_floor, model.mean_mal_, model.var_mal_,
                  n_mal);
    model.log_prior_ben_ = std::log(n_ben / (n_ben + n_mal));
    model.log_prior_mal_ = std::log(n_mal / (n_ben + n_mal));
    return model;
}

double NaiveBayesModel::score(RowRef x) const {
    check_dim(x);
    return (log_prior_mal_ + log_likelihood(x, mean_mal_, var_mal_)) -
           (log_prior_ben_ + log_likelihood(x, mean_ben_, var_ben_));
}

std::pair<double, double> NaiveBayesModel::posteriors(RowRef x) const {
    double s = score(x);
    double t = std::exp(-std::abs(s));
    double p_big = 1.0 / (1.0 + t);
    double p_small = t / (1.0 + t);
    return s >= 0.0 ? std::pair{p_small, p_big} : std::pair{p_big, p_small};
}

void NaiveBayesModel::save(std::ostream& out) const {
    out << "bayes " << mean_ben_.size() << ' ';
    write_hex_double(out, log_prior_ben_);
    out << ' ';
    write_hex_double(out, log_prior_mal_);
    out << '\n';
    save_vector(out, mean_ben_);
    save_vector(out, var_ben_);
    save_vector(out, mean_mal_);
    save_vector(out, var_mal_);
}

NaiveBayesModel NaiveBayesModel::load(std::istream& in) {
    expect_tag(in, "bayes");
    long d = read_long(in, "feature count");
    if (d < 1) throw ParseError("bayes feature count must be positive");
    NaiveBayesModel model;
    model.log_prior_ben_ = read_hex_double(in, "benign prior");
    model.log_prior_mal_ = read_hex_double(in, "malicious prior");
    model.mean_ben_ = load_vector(in, d);
    model.var_ben_ = load_vector(in, d);
    model.mean_mal_ = load_vector(in, d);
    model.var_mal_ = load_vector(in, d);
    return model;
}

}  // namespace maldom
