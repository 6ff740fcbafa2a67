#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maldom/errors.hpp"
#include "maldom/types.hpp"

namespace maldom {

/// The sixteen canonical popularity/performance features, in fixed order.
const std::vector<std::string>& canonical_schema();

/// One web domain: an identifier, one numeric value per schema feature and
/// a binary label.
struct DomainRecord {
    std::string domain_id;
    RowVector features;
    Label label = Label::Benign;
};

/// Per-feature (min, max) pairs recorded when a dataset is scaled.
struct ScalingParams {
    Vector min;
    Vector max;

    /// Maps a raw row into scaled space: (x - min) / (max - min),
    /// constant features (max == min) map to 0.
    RowVector transform(RowRef x) const;
    /// Inverse map: x * (max - min) + min.
    RowVector inverse(RowRef x) const;
};

/// Immutable column-schema'd record collection. Feature values live in a
/// dense row-major view: one row per record, one column per schema entry.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<std::string> schema, std::vector<std::string> ids,
            Matrix features, std::vector<Label> labels);

    const std::vector<std::string>& schema() const { return schema_; }
    const Matrix& x() const { return x_; }
    const std::vector<Label>& y() const { return y_; }
    const std::vector<std::string>& ids() const { return ids_; }

    Eigen::Index n_records() const { return x_.rows(); }
    Eigen::Index n_features() const { return x_.cols(); }
    RowRef row(Eigen::Index i) const { return x_.row(i); }
    Label label(Eigen::Index i) const { return y_[static_cast<std::size_t>(i)]; }

    int class_count(Label l) const;

    bool scaled() const { return scaled_; }
    const std::optional<ScalingParams>& scaling_params() const { return scaling_; }

    /// Subset of records by row index, preserving schema and scaling state.
    Dataset select_rows(const std::vector<Eigen::Index>& rows) const;

    void set_scaled(bool scaled, std::optional<ScalingParams> params);

private:
    std::vector<std::string> schema_;
    std::vector<std::string> ids_;
    Matrix x_;
    std::vector<Label> y_;
    bool scaled_ = false;
    std::optional<ScalingParams> scaling_;
};

/// Length-d binary feature subset; doubles as a BPSO particle position.
class FeatureMask {
public:
    FeatureMask() = default;
    explicit FeatureMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
    static FeatureMask ones(std::size_t n);
    static FeatureMask zeros(std::size_t n);
    /// Parses a 0/1 string such as "1010110010010001".
    static FeatureMask from_string(const std::string& s);

    std::size_t size() const { return bits_.size(); }
    bool test(std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
    int count() const;
    bool any() const { return count() > 0; }

    std::string to_string() const;
    /// Packs bits into a key for caching; requires size() <= 64.
    std::uint64_t to_key() const;

    bool operator==(const FeatureMask& o) const { return bits_ == o.bits_; }

private:
    std::vector<std::uint8_t> bits_;
};

/// Per-record fold indices for stratified k-fold cross validation.
struct FoldAssignment {
    int k = 0;
    std::vector<int> fold;  // fold[i] in [0, k)

    std::vector<Eigen::Index> test_indices(int f) const;
    std::vector<Eigen::Index> train_indices(int f) const;
};

/// Reads a dataset from CSV. The header must name `domain_id`, all sixteen
/// canonical features and `label`; columns may appear in any order.
Dataset load_csv(const std::string& path);

/// As load_csv but accepts any feature columns between `domain_id` and
/// `label`, e.g. files written from masked datasets.
Dataset load_csv_any_schema(const std::string& path);

/// Writes `domain_id,<features...>,label` rows. Doubles are printed with
/// round-trip precision so exactly representable values survive reload.
void save_csv(const Dataset& d, const std::string& path);

/// Writes scaling parameters as `feature,min,max` rows.
void save_scaling_params(const Dataset& d, const std::string& path);

/// Min-max scales every feature into [0, 1] and records the per-feature
/// (min, max). Constant features map to 0. Rejects already-scaled input.
Dataset min_max_scale(const Dataset& d);

/// Applies previously recorded parameters to a raw dataset (used for
/// per-fold scaling, where held-out rows are mapped with training-fold
/// parameters). Values may fall outside [0, 1].
Dataset scale_with(const Dataset& d, const ScalingParams& params);

/// Recovers the raw dataset from a scaled one using its stored parameters.
Dataset inverse_scale(const Dataset& d);

/// Stratified fold assignment: within each class, records are permuted by
/// a seeded RNG and dealt round-robin, so per-fold class counts differ by
/// at most one. Deterministic given the seed.
FoldAssignment stratified_k_folds(const Dataset& d, int k, std::uint64_t seed);

/// Projects the dataset onto the columns selected by the mask.
Dataset apply_mask(const Dataset& d, const FeatureMask& m);

/// Balanced synthetic dataset over the canonical schema. Six informative
/// features carry class signal: benign records draw all six from a unit
/// Gaussian at zero, while each malicious record belongs to one of two
/// clusters, each shifting one triad of informative features up by
/// `separation * 2 / sqrt(6)` benign standard deviations (so the distance
/// between class means is `separation` in units of the benign spread).
/// The remaining ten features are uniform noise, identical across classes.
/// Emitted unscaled; deterministic given the seed.
Dataset generate_synthetic(int n_per_class, double separation, std::uint64_t seed);

/// Indices of the informative features used by generate_synthetic.
const std::vector<int>& synthetic_informative_features();

}  // namespace maldom
