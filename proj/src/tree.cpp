#include "maldom/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "maldom/mathutil.hpp"
#include "maldom/serialize.hpp"

namespace maldom {

namespace {

double entropy_bits(double w_pos, double w_total) {
    if (w_total <= 0.0) return 0.0;
    double p = w_pos / w_total;
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

// Midpoint between adjacent distinct values, nudged down if rounding would
// put equal-to-threshold records on the wrong side.
double split_midpoint(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    if (mid >= hi) mid = lo;
    return mid;
}

void save_nodes(std::ostream& out, const std::vector<TreeNode>& nodes) {
    for (const TreeNode& nd : nodes) {
        out << nd.feature << ' ';
        write_hex_double(out, nd.threshold);
        out << ' ' << nd.left << ' ' << nd.right << ' ';
        write_hex_double(out, nd.weight_malicious);
        out << ' ';
        write_hex_double(out, nd.weight_total);
        out << ' ' << nd.n_records << ' ' << nd.n_errors << ' ';
        write_hex_double(out, nd.value);
        out << '\n';
    }
}

std::vector<TreeNode> load_nodes(std::istream& in, long n_nodes) {
    if (n_nodes < 1) throw ParseError("tree node count must be positive");
    std::vector<TreeNode> nodes(static_cast<std::size_t>(n_nodes));
    for (TreeNode& nd : nodes) {
        nd.feature = static_cast<int>(read_long(in, "node feature"));
        nd.threshold = read_hex_double(in, "node threshold");
        nd.left = static_cast<int>(read_long(in, "node left"));
        nd.right = static_cast<int>(read_long(in, "node right"));
        nd.weight_malicious = read_hex_double(in, "node weight");
        nd.weight_total = read_hex_double(in, "node weight");
        nd.n_records = static_cast<int>(read_long(in, "node record count"));
        nd.n_errors = static_cast<int>(read_long(in, "node error count"));
        nd.value = read_hex_double(in, "node value");
    }
    for (const TreeNode& nd : nodes) {
        bool leaf = nd.feature < 0;
        if (leaf != (nd.left < 0) || leaf != (nd.right < 0) ||
            (!leaf && (nd.left >= n_nodes || nd.right >= n_nodes)))
            throw ParseError("tree node links are inconsistent");
    }
    return nodes;
}

int walk(const std::vector<TreeNode>& nodes, RowRef x) {
    int ni = 0;
    while (nodes[static_cast<std::size_t>(ni)].feature >= 0) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(ni)];
        ni = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return ni;
}

int node_depth(const std::vector<TreeNode>& nodes, int ni) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(ni)];
    if (nd.feature < 0) return 0;
    return 1 + std::max(node_depth(nodes, nd.left), node_depth(nodes, nd.right));
}

// Drop nodes orphaned by pruning; indices are remapped depth-first.
std::vector<TreeNode> compact_nodes(const std::vector<TreeNode>& nodes) {
    std::vector<TreeNode> out;
    out.reserve(nodes.size());
    std::function<int(int)> copy = [&](int ni) {
        int at = static_cast<int>(out.size());
        out.push_back(nodes[static_cast<std::size_t>(ni)]);
        if (out[static_cast<std::size_t>(at)].feature >= 0) {
            out[static_cast<std::size_t>(at)].left = copy(nodes[static_cast<std::size_t>(ni)].left);
            out[static_cast<std::size_t>(at)].right = copy(nodes[static_cast<std::size_t>(ni)].right);
        }
        return at;
    };
    copy(0);
    return out;
}

}  // namespace

double gain_ratio(const std::vector<Label>& left, const std::vector<Label>& right) {
    auto pos = [](const std::vector<Label>& ys) {
        return static_cast<double>(std::count(ys.begin(), ys.end(), Label::Malicious));
    };
    double nl = static_cast<double>(left.size());
    double nr = static_cast<double>(right.size());
    double n = nl + nr;
    if (nl == 0.0 || nr == 0.0) return 0.0;
    double parent = entropy_bits(pos(left) + pos(right), n);
    double children = (nl / n) * entropy_bits(pos(left), nl) + (nr / n) * entropy_bits(pos(right), nr);
    double split_info = entropy_bits(nl, n);
    if (split_info <= 0.0) return 0.0;
    return (parent - children) / split_info;
}

double pessimistic_extra_errors(double n, double e, double confidence) {
    if (n <= 0.0) return 0.0;
    if (confidence <= 0.0 || confidence >= 1.0)
        throw ConfigError("prune confidence must lie in (0, 1)");
    if (e < 1.0) {
        double base = n * (1.0 - std::pow(confidence, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (pessimistic_extra_errors(n, 1.0, confidence) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    double z = inverse_normal_cdf(1.0 - confidence);
    double f = (e + 0.5) / n;
    double upper =
        (f + z * z / (2.0 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) /
        (1.0 + z * z / n);
    return upper * n - e;
}

DecisionTree DecisionTree::fit(const Matrix& x, const std::vector<Label>& y,
                               const Vector& sample_weights, const TreeGrowth& growth,
                               Rng* feature_rng) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n < 1 || d < 1) throw FitError("decision tree needs at least one record and feature");
    if (static_cast<Eigen::Index>(y.size()) != n || sample_weights.size() != n)
        throw ShapeError("labels and weights must match the record count");
    if ((sample_weights.array() <= 0.0).any())
        throw FitError("sample weights must be positive");
    if (growth.min_leaf < 1) throw ConfigError("min_leaf must be positive");
    if (growth.mtry < 0 || growth.mtry > d)
        throw ConfigError("mtry must lie in [0, n_features]");

    DecisionTree tree;
    tree.n_features_ = d;
    std::vector<TreeNode>& nodes = tree.nodes_;

    std::vector<int> all_features(static_cast<std::size_t>(d));
    std::iota(all_features.begin(), all_features.end(), 0);
    const bool subsample_features = growth.mtry > 0 && growth.mtry < d && feature_rng != nullptr;

    std::function<int(std::vector<int>&, int)> build = [&](std::vector<int>& idx, int depth) -> int {
        const int at = static_cast<int>(nodes.size());
        nodes.emplace_back();

        double wm = 0.0, wt = 0.0;
        int cm = 0;
        for (int i : idx) {
            wt += sample_weights[i];
            if (y[static_cast<std::size_t>(i)] == Label::Malicious) {
                wm += sample_weights[i];
                ++cm;
            }
        }
        const int nrec = static_cast<int>(idx.size());
        const bool majority_malicious = wm >= wt - wm;
        nodes[at].weight_malicious = wm;
        nodes[at].weight_total = wt;
        nodes[at].n_records = nrec;
        nodes[at].n_errors = majority_malicious ? nrec - cm : cm;
        nodes[at].value = 2.0 * wm / wt - 1.0;

        const bool pure = cm == 0 || cm == nrec;
        const bool at_depth = growth.max_depth && depth >= *growth.max_depth;
        if (pure || at_depth || nrec < 2 * growth.min_leaf) return at;

        std::vector<int> candidates;
        if (subsample_features) {
            std::vector<int> pool = all_features;
            for (int j = 0; j < growth.mtry; ++j) {
                std::size_t pick = j + feature_rng->uniform_index(pool.size() - j);
                std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
            }
            candidates.assign(pool.begin(), pool.begin() + growth.mtry);
            std::sort(candidates.begin(), candidates.end());
        } else {
            candidates = all_features;
        }

        const double parent_entropy = entropy_bits(wm, wt);
        double best_ratio = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<int> sorted = idx;
        for (int f : candidates) {
            std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
                double xa = x(a, f), xb = x(b, f);
                return xa < xb || (xa == xb && a < b);
            });
            double left_wm = 0.0, left_wt = 0.0;
            for (int i = 0; i + 1 < nrec; ++i) {
                int row = sorted[static_cast<std::size_t>(i)];
                left_wt += sample_weights[row];
                if (y[static_cast<std::size_t>(row)] == Label::Malicious)
                    left_wm += sample_weights[row];
                double lo = x(row, f);
                double hi = x(sorted[static_cast<std::size_t>(i + 1)], f);
                if (lo == hi) continue;
                int left_n = i + 1;
                if (left_n < growth.min_leaf || nrec - left_n < growth.min_leaf) continue;
                double right_wm = wm - left_wm, right_wt = wt - left_wt;
                double gain = parent_entropy - (left_wt / wt) * entropy_bits(left_wm, left_wt) -
                              (right_wt / wt) * entropy_bits(right_wm, right_wt);
                if (gain <= 1e-12) continue;
                double split_info = entropy_bits(left_wt, wt);
                if (split_info <= 0.0) continue;
                double ratio = gain / split_info;
                if (ratio > best_ratio) {
                    best_ratio = ratio;
                    best_feature = f;
                    best_threshold = split_midpoint(lo, hi);
                }
            }
        }

        if (best_feature < 0) return at;

        std::vector<int> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (int i : idx)
            (x(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        nodes[at].feature = best_feature;
        nodes[at].threshold = best_threshold;
        int li = build(left_idx, depth + 1);
        int ri = build(right_idx, depth + 1);
        nodes[at].left = li;
        nodes[at].right = ri;
        return at;
    };

    std::vector<int> root_idx(static_cast<std::size_t>(n));
    std::iota(root_idx.begin(), root_idx.end(), 0);
    build(root_idx, 0);

    if (growth.prune_confidence > 0.0) {
        const double cf = growth.prune_confidence;
        std::function<double(int)> prune = [&](int ni) -> double {
            TreeNode& nd = nodes[static_cast<std::size_t>(ni)];
            double e = static_cast<double>(nd.n_errors);
            double as_leaf = e + pessimistic_extra_errors(nd.n_records, e, cf);
            if (nd.feature < 0) return as_leaf;
            double as_subtree = prune(nd.left) + prune(nd.right);
            if (as_leaf <= as_subtree + 0.1) {
                nd.feature = -1;
                nd.left = nd.right = -1;
                return as_leaf;
            }
            return as_subtree;
        };
        prune(0);
        nodes = compact_nodes(nodes);
    }
    return tree;
}

double DecisionTree::score(RowRef x) const {
    check_dim(x);
    return nodes_[static_cast<std::size_t>(walk(nodes_, x))].value;
}

int DecisionTree::leaf_for(RowRef x) const {
    check_dim(x);
    return walk(nodes_, x);
}

int DecisionTree::depth() const { return node_depth(nodes_, 0); }

void DecisionTree::save(std::ostream& out) const {
    out << "c45 " << n_features_ << ' ' << nodes_.size() << '\n';
    save_nodes(out, nodes_);
}

DecisionTree DecisionTree::load(std::istream& in) {
    expect_tag(in, "c45");
    DecisionTree tree;
    tree.n_features_ = read_long(in, "feature count");
    if (tree.n_features_ < 1) throw ParseError("tree feature count must be positive");
    tree.nodes_ = load_nodes(in, read_long(in, "node count"));
    return tree;
}

RegressionTree RegressionTree::fit(const Matrix& x, const Vector& residuals,
                                   const Vector& hessians, int max_depth, int min_obs) {
    std::vector<std::vector<int>> order(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        std::vector<int>& ord = order[static_cast<std::size_t>(f)];
        ord.resize(static_cast<std::size_t>(x.rows()));
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) {
            double xa = x(a, f), xb = x(b, f);
            return xa < xb || (xa == xb && a < b);
        });
    }
    return fit_presorted(x, order, residuals, hessians, max_depth, min_obs);
}

RegressionTree RegressionTree::fit_presorted(const Matrix& x,
                                             const std::vector<std::vector<int>>& order,
                                             const Vector& residuals, const Vector& hessians,
                                             int max_depth, int min_obs) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n < 1 || d < 1) throw FitError("regression tree needs at least one record and feature");
    if (residuals.size() != n || hessians.size() != n)
        throw ShapeError("residuals and hessians must match the record count");
    if (static_cast<Eigen::Index>(order.size()) != d)
        throw ShapeError("presorted order must cover every feature");
    if (max_depth < 1) throw ConfigError("max_depth must be positive");
    if (min_obs < 1) throw ConfigError("min_obs must be positive");

    RegressionTree tree;
    tree.n_features_ = d;
    std::vector<TreeNode>& nodes = tree.nodes_;

    using Orders = std::vector<std::vector<int>>;
    std::function<int(Orders&, int)> build = [&](Orders& ord, int depth) -> int {
        const int at = static_cast<int>(nodes.size());
        nodes.emplace_back();
        const std::vector<int>& rows = ord[0];
        const int nrec = static_cast<int>(rows.size());
        double sum_r = 0.0, sum_h = 0.0;
        for (int i : rows) {
            sum_r += residuals[i];
            sum_h += hessians[i];
        }
        nodes[at].n_records = nrec;
        nodes[at].weight_total = static_cast<double>(nrec);
        nodes[at].value = sum_h > 0.0 ? sum_r / sum_h : 0.0;

        if (depth >= max_depth || nrec < 2 * min_obs) return at;

        double parent_score = sum_r * sum_r / nrec;
        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (int f = 0; f < static_cast<int>(d); ++f) {
            const std::vector<int>& sorted = ord[static_cast<std::size_t>(f)];
            double left_r = 0.0;
            for (int i = 0; i + 1 < nrec; ++i) {
                int row = sorted[static_cast<std::size_t>(i)];
                left_r += residuals[row];
                double lo = x(row, f);
                double hi = x(sorted[static_cast<std::size_t>(i + 1)], f);
                if (lo == hi) continue;
                int left_n = i + 1;
                if (left_n < min_obs || nrec - left_n < min_obs) continue;
                double right_r = sum_r - left_r;
                double gain = left_r * left_r / left_n + right_r * right_r / (nrec - left_n) -
                              parent_score;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = split_midpoint(lo, hi);
                }
            }
        }
        if (best_feature < 0) return at;

        Orders left_ord(ord.size()), right_ord(ord.size());
        for (std::size_t f = 0; f < ord.size(); ++f) {
            for (int i : ord[f])
                (x(i, best_feature) <= best_threshold ? left_ord[f] : right_ord[f]).push_back(i);
            ord[f].clear();
            ord[f].shrink_to_fit();
        }
        nodes[at].feature = best_feature;
        nodes[at].threshold = best_threshold;
        int li = build(left_ord, depth + 1);
        int ri = build(right_ord, depth + 1);
        nodes[at].left = li;
        nodes[at].right = ri;
        return at;
    };

    Orders root = order;
    build(root, 0);
    return tree;
}

double RegressionTree::value(RowRef x) const {
    if (x.size() != n_features_) throw ShapeError("record width does not match the tree");
    return nodes_[static_cast<std::size_t>(walk(nodes_, x))].value;
}

void RegressionTree::save(std::ostream& out) const {
    out << "rtree " << n_features_ << ' ' << nodes_.size() << '\n';
    save_nodes(out, nodes_);
}

RegressionTree RegressionTree::load(std::istream& in) {
    expect_tag(in, "rtree");
    RegressionTree tree;
    tree.n_features_ = read_long(in, "feature count");
    if (tree.n_features_ < 1) throw ParseError("tree feature count must be positive");
    tree.nodes_ = load_nodes(in, read_long(in, "node count"));
    return tree;
}

}  // namespace maldom
