#include "maldom/knn.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "maldom/serialize.hpp"

namespace maldom {

KnnModel KnnModel::fit(const Matrix& x, const std::vector<Label>& y, const KnnParams& params) {
    if (x.rows() < 1) throw FitError("knn needs at least one training record");
    if (static_cast<Eigen::Index>(y.size()) != x.rows())
        throw ShapeError("labels must match the record count");
    if (params.k < 1) throw ConfigError("k must be positive");
    if (params.k > x.rows())
        throw FitError("k = " + std::to_string(params.k) + " exceeds the " +
                       std::to_string(x.rows()) + " training records");
    KnnModel model;
    model.train_ = x;
    model.sq_norms_ = x.rowwise().squaredNorm();
    model.labels_ = y;
    model.k_ = params.k;
    return model;
}

double KnnModel::vote_from_sq_dists(const Vector& sq) const {
    const Eigen::Index n = sq.size();
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    auto closer = [&](int a, int b) { return sq[a] < sq[b] || (sq[a] == sq[b] && a < b); };
    std::nth_element(idx.begin(), idx.begin() + (k_ - 1), idx.end(), closer);
    int malicious = 0;
    for (int i = 0; i < k_; ++i)
        if (labels_[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] == Label::Malicious)
            ++malicious;
    return (2.0 * malicious - k_) / k_;
}

double KnnModel::score(RowRef x) const {
    check_dim(x);
    Vector sq = sq_norms_ - 2.0 * (train_ * x.transpose()) +
                Vector::Constant(train_.rows(), x.squaredNorm());
    return vote_from_sq_dists(sq);
}

Vector KnnModel::score_batch(const Matrix& x) const {
    if (x.cols() != n_features())
        throw ShapeError("query has " + std::to_string(x.cols()) +
                         " features, model expects " + std::to_string(n_features()));
    Matrix cross = train_ * x.transpose();  // n_train x n_query
    Vector query_sq = x.rowwise().squaredNorm();
    Vector out(x.rows());
    for (Eigen::Index q = 0; q < x.rows(); ++q) {
        Vector sq = sq_norms_ - 2.0 * cross.col(q) + Vector::Constant(train_.rows(), query_sq[q]);
        out[q] = vote_from_sq_dists(sq);
    }
    return out;
}

void KnnModel::save(std::ostream& out) const {
    out << "knn " << train_.cols() << ' ' << train_.rows() << ' ' << k_ << '\n';
    for (Eigen::Index i = 0; i < train_.rows(); ++i) {
        out << (labels_[static_cast<std::size_t>(i)] == Label::Malicious ? 1 : 0);
        for (Eigen::Index f = 0; f < train_.cols(); ++f) {
            out << ' ';
            write_hex_double(out, train_(i, f));
        }
        out << '\n';
    }
}

KnnModel KnnModel::load(std::istream& in) {
    expect_tag(in, "knn");
    long d = read_long(in, "feature count");
    long n = read_long(in, "record count");
    long k = read_long(in, "k");
    if (d < 1 || n < 1 || k < 1 || k > n) throw ParseError("knn header is inconsistent");
    KnnModel model;
    model.train_.resize(n, d);
    model.labels_.resize(static_cast<std::size_t>(n));
    model.k_ = static_cast<int>(k);
    for (long i = 0; i < n; ++i) {
        long lab = read_long(in, "record label");
        if (lab != 0 && lab != 1) throw ParseError("knn record label must be 0 or 1");
        model.labels_[static_cast<std::size_t>(i)] = lab ? Label::Malicious : Label::Benign;
        for (long f = 0; f < d; ++f) model.train_(i, f) = read_hex_double(in, "record value");
    }
    model.sq_norms_ = model.train_.rowwise().squaredNorm();
    return model;
}

}  // namespace maldom
