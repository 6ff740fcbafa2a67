#include "maldom/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "maldom/mathutil.hpp"
#include "maldom/parallel.hpp"
#include "maldom/random.hpp"
#include "maldom/serialize.hpp"

namespace maldom {

namespace {

constexpr double kAlphaCap = 13.815510557964274;  // ln(1e6), stage weight for a perfect learner

void check_training_input(const Matrix& x, const std::vector<Label>& y) {
    if (x.rows() < 1 || x.cols() < 1)
        throw FitError("ensemble needs at least one record and feature");
    if (static_cast<Eigen::Index>(y.size()) != x.rows())
        throw ShapeError("labels must match the record count");
}

// Bootstrap resample: n draws with replacement from the member's own stream.
void bootstrap_sample(const Matrix& x, const std::vector<Label>& y, Rng& rng, Matrix& bx,
                      std::vector<Label>& by) {
    const Eigen::Index n = x.rows();
    bx.resize(n, x.cols());
    by.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t pick = rng.uniform_index(static_cast<std::size_t>(n));
        bx.row(i) = x.row(static_cast<Eigen::Index>(pick));
        by[static_cast<std::size_t>(i)] = y[pick];
    }
}

TrainedModel fit_bagged(const std::string& family, const Matrix& x, const std::vector<Label>& y,
                        int n_trees, const TreeGrowth& growth, bool bootstrap, std::uint64_t seed,
                        int n_threads) {
    check_training_input(x, y);
    if (n_trees < 1) throw ConfigError("ensemble size must be positive");
    std::vector<DecisionTree> trees(static_cast<std::size_t>(n_trees));
    parallel_for(static_cast<std::size_t>(n_trees), n_threads, [&](std::size_t t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        if (bootstrap) {
            Matrix bx;
            std::vector<Label> by;
            bootstrap_sample(x, y, rng, bx, by);
            trees[t] = DecisionTree::fit(bx, by, Vector::Ones(bx.rows()), growth, &rng);
        } else {
            trees[t] = DecisionTree::fit(x, y, Vector::Ones(x.rows()), growth, &rng);
        }
    });
    return std::make_shared<VotedEnsemble>(family, x.cols(), std::move(trees),
                                           std::vector<double>(static_cast<std::size_t>(n_trees), 1.0),
                                           0.0);
}

TrainedModel fit_adaboost(const Matrix& x, const std::vector<Label>& y,
                          const AdaBoostParams& params) {
    check_training_input(x, y);
    if (params.n_learners < 1) throw ConfigError("ensemble size must be positive");
    const Eigen::Index n = x.rows();
    TreeGrowth growth;
    growth.min_leaf = 1;
    growth.max_depth = params.max_depth;

    Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
    std::vector<DecisionTree> trees;
    std::vector<double> alphas;
    for (int t = 0; t < params.n_learners; ++t) {
        DecisionTree tree = DecisionTree::fit(x, y, w, growth);
        Vector scores = tree.score_batch(x);
        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            Label pred = scores[i] >= 0.0 ? Label::Malicious : Label::Benign;
            if (pred != y[static_cast<std::size_t>(i)]) err += w[i];
        }
        if (err >= 0.5) break;  // learner no better than chance: discard it and stop
        if (err <= 0.0) {
            trees.push_back(std::move(tree));
            alphas.push_back(kAlphaCap);
            break;
        }
        double alpha = std::log((1.0 - err) / err);
        trees.push_back(std::move(tree));
        alphas.push_back(alpha);
        for (Eigen::Index i = 0; i < n; ++i) {
            Label pred = scores[i] >= 0.0 ? Label::Malicious : Label::Benign;
            if (pred != y[static_cast<std::size_t>(i)]) w[i] *= std::exp(alpha);
        }
        w /= w.sum();
    }

    double n_mal = 0.0;
    for (Label lab : y)
        if (lab == Label::Malicious) n_mal += 1.0;
    double fallback = 2.0 * n_mal / static_cast<double>(n) - 1.0;
    return std::make_shared<VotedEnsemble>("adaboost", x.cols(), std::move(trees),
                                           std::move(alphas), fallback);
}

TrainedModel fit_gbm(const Matrix& x, const std::vector<Label>& y, const GbmParams& params) {
    check_training_input(x, y);
    if (params.n_trees < 0) throw ConfigError("ensemble size must be non-negative");
    if (params.shrinkage <= 0.0 || params.shrinkage > 1.0)
        throw ConfigError("shrinkage must lie in (0, 1]");
    const Eigen::Index n = x.rows();

    Vector y01(n);
    for (Eigen::Index i = 0; i < n; ++i) y01[i] = label01(y[static_cast<std::size_t>(i)]);
    double p_bar = y01.mean();
    if (p_bar <= 0.0 || p_bar >= 1.0)
        throw FitError("gbm needs training records from both classes");
    const double f0 = std::log(p_bar / (1.0 - p_bar));

    std::vector<std::vector<int>> order(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        std::vector<int>& ord = order[static_cast<std::size_t>(f)];
        ord.resize(static_cast<std::size_t>(n));
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) {
            double xa = x(a, f), xb = x(b, f);
            return xa < xb || (xa == xb && a < b);
        });
    }

    Vector fx = Vector::Constant(n, f0);
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(params.n_trees));
    std::vector<double> deviance;
    deviance.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        Vector p = fx.unaryExpr([](double v) { return sigmoid(v); });
        Vector residuals = y01 - p;  // == gbm_pseudo_residuals(fx, y)
        Vector hessians = p.cwiseProduct(Vector::Ones(n) - p);
        RegressionTree tree =
            RegressionTree::fit_presorted(x, order, residuals, hessians, params.depth,
                                          params.min_obs);
        for (Eigen::Index i = 0; i < n; ++i)
            fx[i] += params.shrinkage * tree.value(x.row(i));
        deviance.push_back(bernoulli_deviance(fx, y));
        trees.push_back(std::move(tree));
    }
    return std::make_shared<GbmModel>(x.cols(), f0, params.shrinkage, std::move(trees),
                                      std::move(deviance));
}

}  // namespace

double bernoulli_deviance(const Vector& f, const std::vector<Label>& y) {
    if (static_cast<Eigen::Index>(y.size()) != f.size())
        throw ShapeError("labels must match the score count");
    if (f.size() < 1) throw ShapeError("deviance needs at least one record");
    double dev = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i)
        dev += softplus(f[i]) - label01(y[static_cast<std::size_t>(i)]) * f[i];
    return 2.0 * dev / static_cast<double>(f.size());
}

Vector gbm_pseudo_residuals(const Vector& f, const std::vector<Label>& y) {
    if (static_cast<Eigen::Index>(y.size()) != f.size())
        throw ShapeError("labels must match the score count");
    Vector r(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
        r[i] = label01(y[static_cast<std::size_t>(i)]) - sigmoid(f[i]);
    return r;
}

VotedEnsemble::VotedEnsemble(std::string family, Eigen::Index n_features,
                             std::vector<DecisionTree> trees, std::vector<double> weights,
                             double fallback_score)
    : family_(std::move(family)),
      n_features_(n_features),
      trees_(std::move(trees)),
      weights_(std::move(weights)),
      fallback_score_(fallback_score) {
    if (trees_.size() != weights_.size())
        throw ShapeError("ensemble needs one weight per tree");
}

double VotedEnsemble::score(RowRef x) const {
    check_dim(x);
    if (trees_.empty()) return fallback_score_;
    double vote = 0.0, total = 0.0;
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        vote += weights_[t] * (trees_[t].score(x) >= 0.0 ? 1.0 : -1.0);
        total += weights_[t];
    }
    return vote / total;
}

void VotedEnsemble::save(std::ostream& out) const {
    out << "ensemble " << family_ << ' ' << n_features_ << ' ' << trees_.size() << ' ';
    write_hex_double(out, fallback_score_);
    out << '\n';
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        write_hex_double(out, weights_[t]);
        out << '\n';
        trees_[t].save(out);
    }
}

VotedEnsemble VotedEnsemble::load(std::istream& in) {
    expect_tag(in, "ensemble");
    std::string family = read_token(in, "ensemble family");
    if (family != "bagging" && family != "adaboost" && family != "rf")
        throw ParseError("unknown ensemble family '" + family + "'");
    long d = read_long(in, "feature count");
    long n_trees = read_long(in, "tree count");
    if (d < 1 || n_trees < 0) throw ParseError("ensemble header is inconsistent");
    double fallback = read_hex_double(in, "fallback score");
    std::vector<DecisionTree> trees;
    std::vector<double> weights;
    trees.reserve(static_cast<std::size_t>(n_trees));
    for (long t = 0; t < n_trees; ++t) {
        weights.push_back(read_hex_double(in, "tree weight"));
        trees.push_back(DecisionTree::load(in));
        if (trees.back().n_features() != d)
            throw ParseError("ensemble tree width does not match the header");
    }
    return VotedEnsemble(family, d, std::move(trees), std::move(weights), fallback);
}

GbmModel::GbmModel(Eigen::Index n_features, double f0, double shrinkage,
                   std::vector<RegressionTree> trees, std::vector<double> deviance_trace)
    : n_features_(n_features),
      f0_(f0),
      shrinkage_(shrinkage),
      trees_(std::move(trees)),
      deviance_trace_(std::move(deviance_trace)) {}

double GbmModel::score(RowRef x) const {
    check_dim(x);
    double fx = f0_;
    for (const RegressionTree& tree : trees_) fx += shrinkage_ * tree.value(x);
    return fx;
}

Vector GbmModel::score_batch(const Matrix& x) const {
    if (x.cols() != n_features_) throw ShapeError("query width does not match the model");
    Vector fx = Vector::Constant(x.rows(), f0_);
    for (const RegressionTree& tree : trees_)
        for (Eigen::Index i = 0; i < x.rows(); ++i) fx[i] += shrinkage_ * tree.value(x.row(i));
    return fx;
}

void GbmModel::save(std::ostream& out) const {
    out << "gbm " << n_features_ << ' ' << trees_.size() << ' ';
    write_hex_double(out, f0_);
    out << ' ';
    write_hex_double(out, shrinkage_);
    out << '\n';
    for (const RegressionTree& tree : trees_) tree.save(out);
    out << "deviance " << deviance_trace_.size() << '\n';
    for (std::size_t i = 0; i < deviance_trace_.size(); ++i) {
        if (i) out << ' ';
        write_hex_double(out, deviance_trace_[i]);
    }
    if (!deviance_trace_.empty()) out << '\n';
}

GbmModel GbmModel::load(std::istream& in) {
    expect_tag(in, "gbm");
    long d = read_long(in, "feature count");
    long n_trees = read_long(in, "tree count");
    if (d < 1 || n_trees < 0) throw ParseError("gbm header is inconsistent");
    double f0 = read_hex_double(in, "baseline score");
    double shrinkage = read_hex_double(in, "shrinkage");
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(n_trees));
    for (long t = 0; t < n_trees; ++t) {
        trees.push_back(RegressionTree::load(in));
        if (trees.back().nodes().empty()) throw ParseError("gbm tree is empty");
    }
    expect_tag(in, "deviance");
    long n_dev = read_long(in, "deviance length");
    if (n_dev != n_trees) throw ParseError("gbm deviance trace does not match the tree count");
    std::vector<double> deviance(static_cast<std::size_t>(n_dev));
    for (double& v : deviance) v = read_hex_double(in, "deviance value");
    return GbmModel(d, f0, shrinkage, std::move(trees), std::move(deviance));
}

TrainedModel fit_ensemble(const EnsembleSpec& spec, const Matrix& x, const std::vector<Label>& y,
                          std::uint64_t seed, int n_threads) {
    return std::visit(
        [&](const auto& params) -> TrainedModel {
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, BaggingParams>) {
                TreeGrowth growth;
                growth.min_leaf = 1;
                if (params.max_depth > 0) growth.max_depth = params.max_depth;
                return fit_bagged("bagging", x, y, params.n_learners, growth, true, seed,
                                  n_threads);
            } else if constexpr (std::is_same_v<P, RandomForestParams>) {
                if (params.mtry < 1) throw ConfigError("mtry must be positive");
                TreeGrowth growth;
                growth.min_leaf = 1;
                growth.mtry = static_cast<int>(std::min<Eigen::Index>(params.mtry, x.cols()));
                return fit_bagged("rf", x, y, params.n_trees, growth, params.bootstrap, seed,
                                  n_threads);
            } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
                return fit_adaboost(x, y, params);
            } else {
                return fit_gbm(x, y, params);
            }
        },
        spec);
}

}  // namespace maldom
