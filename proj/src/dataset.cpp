#include "maldom/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "maldom/random.hpp"

namespace maldom {

const std::vector<std::string>& canonical_schema() {
    static const std::vector<std::string> names = {
        "moz_domain_authority", "moz_rank",        "moz_backlinks",
        "majestic_citation_flow", "majestic_trust_flow", "majestic_backlinks",
        "majestic_ref_domains", "facebook_shares", "twitter_tweets",
        "google_plus_ones",     "google_page_rank", "google_page_speed",
        "alexa_rank",           "alexa_reach_1m",  "alexa_reach_3m",
        "alexa_median_load"};
    return names;
}

RowVector ScalingParams::transform(RowRef x) const {
    RowVector out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double range = max(j) - min(j);
        out(j) = range == 0.0 ? 0.0 : (x(j) - min(j)) / range;
    }
    return out;
}

RowVector ScalingParams::inverse(RowRef x) const {
    RowVector out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        out(j) = x(j) * (max(j) - min(j)) + min(j);
    }
    return out;
}

Dataset::Dataset(std::vector<std::string> schema, std::vector<std::string> ids,
                 Matrix features, std::vector<Label> labels)
    : schema_(std::move(schema)),
      ids_(std::move(ids)),
      x_(std::move(features)),
      y_(std::move(labels)) {
    if (x_.cols() != static_cast<Eigen::Index>(schema_.size()))
        throw ShapeError("feature matrix width does not match schema length");
    if (x_.rows() != static_cast<Eigen::Index>(y_.size()) ||
        x_.rows() != static_cast<Eigen::Index>(ids_.size()))
        throw ShapeError("record count mismatch between ids, features and labels");
    if (!x_.allFinite())
        throw ParseError("non-finite feature value in dataset");
}

int Dataset::class_count(Label l) const {
    return static_cast<int>(std::count(y_.begin(), y_.end(), l));
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& rows) const {
    Matrix x(static_cast<Eigen::Index>(rows.size()), x_.cols());
    std::vector<std::string> ids(rows.size());
    std::vector<Label> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = x_.row(rows[i]);
        ids[i] = ids_[static_cast<std::size_t>(rows[i])];
        y[i] = y_[static_cast<std::size_t>(rows[i])];
    }
    Dataset out(schema_, std::move(ids), std::move(x), std::move(y));
    out.scaled_ = scaled_;
    out.scaling_ = scaling_;
    return out;
}

void Dataset::set_scaled(bool scaled, std::optional<ScalingParams> params) {
    scaled_ = scaled;
    scaling_ = std::move(params);
}

FeatureMask FeatureMask::ones(std::size_t n) {
    return FeatureMask(std::vector<std::uint8_t>(n, 1));
}

FeatureMask FeatureMask::zeros(std::size_t n) {
    return FeatureMask(std::vector<std::uint8_t>(n, 0));
}

FeatureMask FeatureMask::from_string(const std::string& s) {
    std::vector<std::uint8_t> bits;
    bits.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw ConfigError("feature mask string must contain only 0 and 1");
        bits.push_back(c == '1' ? 1 : 0);
    }
    return FeatureMask(std::move(bits));
}

int FeatureMask::count() const {
    return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1));
}

std::string FeatureMask::to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) s[i] = '1';
    return s;
}

std::uint64_t FeatureMask::to_key() const {
    if (bits_.size() > 64) throw ConfigError("feature mask too long to pack");
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) key |= (1ULL << i);
    return key;
}

std::vector<Eigen::Index> FoldAssignment::test_indices(int f) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < fold.size(); ++i)
        if (fold[i] == f) out.push_back(static_cast<Eigen::Index>(i));
    return out;
}

std::vector<Eigen::Index> FoldAssignment::train_indices(int f) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < fold.size(); ++i)
        if (fold[i] != f) out.push_back(static_cast<Eigen::Index>(i));
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_cell(const std::string& cell, std::size_t data_row, const std::string& col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
        throw ParseError("cell \"" + cell + "\" in column " + col + ", row " +
                         std::to_string(data_row) + " is not a finite number");
    return value;
}

Dataset load_csv_impl(const std::string& path, bool require_full_schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_line(line);

    auto find_col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw SchemaError(path + ": missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };

    std::size_t id_col = find_col("domain_id");
    std::size_t label_col = find_col("label");

    std::vector<std::string> schema;
    std::vector<std::size_t> feature_cols;
    if (require_full_schema) {
        for (const auto& name : canonical_schema()) {
            feature_cols.push_back(find_col(name));
            schema.push_back(name);
        }
    } else {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == id_col || c == label_col) continue;
            schema.push_back(header[c]);
            feature_cols.push_back(c);
        }
        if (schema.empty()) throw SchemaError(path + ": no feature columns");
    }

    std::vector<std::string> ids;
    std::vector<Label> labels;
    std::vector<double> values;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++data_row;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw ParseError(path + ": row " + std::to_string(data_row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        ids.push_back(cells[id_col]);
        std::string token = cells[label_col];
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (token == "malicious")
            labels.push_back(Label::Malicious);
        else if (token == "benign")
            labels.push_back(Label::Benign);
        else
            throw LabelError(path + ": unknown label \"" + cells[label_col] +
                             "\" in row " + std::to_string(data_row));
        for (std::size_t j = 0; j < feature_cols.size(); ++j)
            values.push_back(parse_cell(cells[feature_cols[j]], data_row, schema[j]));
    }

    Eigen::Index n = static_cast<Eigen::Index>(ids.size());
    Eigen::Index d = static_cast<Eigen::Index>(schema.size());
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            x(i, j) = values[static_cast<std::size_t>(i * d + j)];
    return Dataset(std::move(schema), std::move(ids), std::move(x), std::move(labels));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Dataset load_csv(const std::string& path) { return load_csv_impl(path, true); }

Dataset load_csv_any_schema(const std::string& path) { return load_csv_impl(path, false); }

void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "domain_id";
    for (const auto& name : d.schema()) out << ',' << name;
    out << ",label\n";
    for (Eigen::Index i = 0; i < d.n_records(); ++i) {
        out << d.ids()[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d.n_features(); ++j)
            out << ',' << format_double(d.x()(i, j));
        out << ',' << to_string(d.label(i)) << '\n';
    }
}

void save_scaling_params(const Dataset& d, const std::string& path) {
    if (!d.scaling_params())
        throw ConfigError("dataset has no scaling parameters to export");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "feature,min,max\n";
    const auto& p = *d.scaling_params();
    for (Eigen::Index j = 0; j < d.n_features(); ++j)
        out << d.schema()[static_cast<std::size_t>(j)] << ','
            << format_double(p.min(j)) << ',' << format_double(p.max(j)) << '\n';
}

Dataset min_max_scale(const Dataset& d) {
    if (d.scaled()) throw ConfigError("dataset is already scaled");
    if (d.n_records() == 0) throw ConfigError("cannot scale an empty dataset");
    ScalingParams params{d.x().colwise().minCoeff(), d.x().colwise().maxCoeff()};
    Matrix x(d.n_records(), d.n_features());
    for (Eigen::Index j = 0; j < d.n_features(); ++j) {
        double range = params.max(j) - params.min(j);
        if (range == 0.0)
            x.col(j).setZero();
        else
            x.col(j) = (d.x().col(j).array() - params.min(j)) / range;
    }
    Dataset out(d.schema(), d.ids(), std::move(x), d.y());
    out.set_scaled(true, std::move(params));
    return out;
}

Dataset scale_with(const Dataset& d, const ScalingParams& params) {
    if (params.min.size() != d.n_features())
        throw ShapeError("scaling parameter length does not match feature count");
    Matrix x(d.n_records(), d.n_features());
    for (Eigen::Index i = 0; i < d.n_records(); ++i)
        x.row(i) = params.transform(d.row(i));
    Dataset out(d.schema(), d.ids(), std::move(x), d.y());
    out.set_scaled(true, params);
    return out;
}

Dataset inverse_scale(const Dataset& d) {
    if (!d.scaled() || !d.scaling_params())
        throw ConfigError("dataset is not scaled");
    const auto& p = *d.scaling_params();
    Matrix x(d.n_records(), d.n_features());
    for (Eigen::Index i = 0; i < d.n_records(); ++i)
        x.row(i) = p.inverse(d.row(i));
    Dataset out(d.schema(), d.ids(), std::move(x), d.y());
    out.set_scaled(false, std::nullopt);
    return out;
}

FoldAssignment stratified_k_folds(const Dataset& d, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count must be at least 2");
    for (Label l : {Label::Malicious, Label::Benign}) {
        int count = d.class_count(l);
        if (count < k)
            throw ConfigError(std::string("class ") + to_string(l) + " has " +
                              std::to_string(count) + " records, fewer than k=" +
                              std::to_string(k));
    }
    FoldAssignment assignment;
    assignment.k = k;
    assignment.fold.assign(static_cast<std::size_t>(d.n_records()), -1);
    Rng rng(seed);
    for (Label l : {Label::Malicious, Label::Benign}) {
        std::vector<std::size_t> members;
        for (Eigen::Index i = 0; i < d.n_records(); ++i)
            if (d.label(i) == l) members.push_back(static_cast<std::size_t>(i));
        rng.shuffle(members);
        for (std::size_t pos = 0; pos < members.size(); ++pos)
            assignment.fold[members[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return assignment;
}

Dataset apply_mask(const Dataset& d, const FeatureMask& m) {
    if (m.size() != static_cast<std::size_t>(d.n_features()))
        throw ShapeError("mask length does not match feature count");
    if (!m.any()) throw InvalidMaskError("all-zero feature mask selects no features");
    std::vector<Eigen::Index> cols;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (m.test(j)) cols.push_back(static_cast<Eigen::Index>(j));
    Matrix x(d.n_records(), static_cast<Eigen::Index>(cols.size()));
    std::vector<std::string> schema;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        x.col(static_cast<Eigen::Index>(c)) = d.x().col(cols[c]);
        schema.push_back(d.schema()[static_cast<std::size_t>(cols[c])]);
    }
    Dataset out(std::move(schema), d.ids(), std::move(x), d.y());
    if (d.scaled() && d.scaling_params()) {
        ScalingParams sub;
        sub.min.resize(static_cast<Eigen::Index>(cols.size()));
        sub.max.resize(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            sub.min(static_cast<Eigen::Index>(c)) = d.scaling_params()->min(cols[c]);
            sub.max(static_cast<Eigen::Index>(c)) = d.scaling_params()->max(cols[c]);
        }
        out.set_scaled(true, std::move(sub));
    }
    return out;
}

const std::vector<int>& synthetic_informative_features() {
    static const std::vector<int> idx = {0, 1, 2, 3, 4, 5};
    return idx;
}

Dataset generate_synthetic(int n_per_class, double separation, std::uint64_t seed) {
    if (n_per_class < 1) throw ConfigError("n_per_class must be at least 1");
    if (separation < 0) throw ConfigError("separation must be non-negative");

    const auto& schema = canonical_schema();
    const Eigen::Index d = static_cast<Eigen::Index>(schema.size());
    const Eigen::Index n = 2 * static_cast<Eigen::Index>(n_per_class);

    // Two malicious clusters, each lifting one triad of informative
    // features. The cluster shift is chosen so that the distance between
    // the class means equals `separation` benign standard deviations.
    const double shift = separation * 2.0 / std::sqrt(6.0);
    const double cluster_sd = 1.0;
    const std::vector<int> triad_a = {0, 1, 2};
    const std::vector<int> triad_b = {3, 4, 5};

    Matrix x(n, d);
    std::vector<Label> labels(static_cast<std::size_t>(n));
    std::vector<std::string> ids(static_cast<std::size_t>(n));
    Rng rng(seed);
    char buf[48];
    for (Eigen::Index i = 0; i < n; ++i) {
        bool malicious = i < n_per_class;
        labels[static_cast<std::size_t>(i)] = malicious ? Label::Malicious : Label::Benign;
        std::snprintf(buf, sizeof(buf), "%s-%06lld", malicious ? "mal" : "ben",
                      static_cast<long long>(malicious ? i : i - n_per_class));
        ids[static_cast<std::size_t>(i)] = buf;

        const std::vector<int>* active = nullptr;
        if (malicious) active = rng.u01() < 0.5 ? &triad_a : &triad_b;

        for (int j : synthetic_informative_features()) {
            double mean = 0.0, sd = 1.0;
            if (malicious) {
                sd = cluster_sd;
                if (std::find(active->begin(), active->end(), j) != active->end())
                    mean = shift;
            }
            x(i, j) = mean + sd * rng.normal();
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            bool informative =
                std::find(synthetic_informative_features().begin(),
                          synthetic_informative_features().end(),
                          static_cast<int>(j)) != synthetic_informative_features().end();
            if (!informative) x(i, j) = rng.u01();
        }
    }
    return Dataset(schema, std::move(ids), std::move(x), std::move(labels));
}

}  // namespace maldom
