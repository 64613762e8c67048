#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace probsel {

enum class FeatureKind { nominal, continuous };

struct FeatureMeta {
    std::string name;
    FeatureKind kind{FeatureKind::continuous};
    /// Number of codes for nominal features; 0 for continuous ones.
    int arity{0};

    static FeatureMeta nominal(std::string name, int arity) {
        return {std::move(name), FeatureKind::nominal, arity};
    }
    static FeatureMeta continuous(std::string name) { return {std::move(name), FeatureKind::continuous, 0}; }

    [[nodiscard]] bool is_nominal() const noexcept { return kind == FeatureKind::nominal; }
    bool operator==(const FeatureMeta &) const = default;
};

/// How the informative feature of the five-feature nominal task is sampled.
enum class SamplingMode { proportional, oversample, undersample };

[[nodiscard]] std::string_view to_string(SamplingMode mode);
[[nodiscard]] SamplingMode sampling_mode_from_string(std::string_view text);

/// One feature of the Weston-style generator: y*N(c,1) with probability p,
/// N(0,1) otherwise. Non-informative features are always N(0,1).
struct WestonFeatureSpec {
    double c{0.0};
    double p{0.0};
    bool informative{true};
};

/// Non-owning view of one example. A cell flagged missing carries no value.
struct RowView {
    std::span<const double> values;
    std::span<const std::uint8_t> missing;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double operator[](std::size_t j) const noexcept { return values[j]; }
    [[nodiscard]] bool is_missing(std::size_t j) const noexcept { return missing[j] != 0; }
};

/// Examples with labels in {-1,+1}, an optional unlabeled pool and a
/// per-cell missing mask. Immutable once built; every transform returns a
/// new dataset.
class Dataset {
  public:
    Dataset() = default;

    /// Builds from row vectors; a NaN cell is recorded as missing.
    /// Throws SchemaError / ShapeError when the invariants do not hold.
    Dataset(std::vector<FeatureMeta> meta, const std::vector<std::vector<double>> &rows, std::vector<int> labels,
            const std::vector<std::vector<double>> &unlabeled = {});

    [[nodiscard]] std::size_t d() const noexcept { return meta_.size(); }
    [[nodiscard]] std::size_t n() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t n_unlabeled() const noexcept { return unl_count_; }

    [[nodiscard]] const std::vector<FeatureMeta> &meta() const noexcept { return meta_; }
    [[nodiscard]] const FeatureMeta &feature(std::size_t j) const { return meta_.at(j); }

    [[nodiscard]] RowView row(std::size_t i) const;
    [[nodiscard]] RowView unlabeled_row(std::size_t i) const;
    [[nodiscard]] int label(std::size_t i) const { return labels_.at(i); }
    [[nodiscard]] std::span<const int> labels() const noexcept { return labels_; }

    [[nodiscard]] std::vector<RowView> labeled_rows() const;
    [[nodiscard]] std::vector<RowView> unlabeled_rows() const;

    [[nodiscard]] std::size_t count_label(int y) const noexcept;
    [[nodiscard]] std::size_t missing_count() const noexcept;
    [[nodiscard]] bool has_missing() const noexcept { return missing_count() > 0; }

    /// Labeled rows at the given indices (repeats allowed); the unlabeled pool is kept.
    [[nodiscard]] Dataset select_rows(std::span<const std::size_t> indices) const;
    [[nodiscard]] Dataset without_row(std::size_t i) const;
    /// Keeps the given columns in the given order, for labeled and unlabeled rows.
    [[nodiscard]] Dataset select_columns(std::span<const std::size_t> columns) const;
    [[nodiscard]] Dataset without_column(std::size_t j) const;
    /// Same labeled rows; the unlabeled pool becomes every row of `pool`, labels discarded.
    [[nodiscard]] Dataset with_unlabeled(const Dataset &pool) const;
    /// Appends columns; `extra` and `extra_unlabeled` are row-major with
    /// meta.size() values per row.
    [[nodiscard]] Dataset with_appended_columns(const std::vector<FeatureMeta> &meta, std::span<const double> extra,
                                                std::span<const double> extra_unlabeled) const;

    bool operator==(const Dataset &) const = default;

  private:
    void validate() const;

    std::vector<FeatureMeta> meta_;
    std::vector<double> values_;
    std::vector<std::uint8_t> missing_;
    std::vector<int> labels_;
    std::vector<double> unl_values_;
    std::vector<std::uint8_t> unl_missing_;
    std::size_t unl_count_{0};
};

/// Reads a comma-separated file whose header names the features and the
/// label column. Label "?" routes a row to the unlabeled pool; cell "?" is
/// missing. A sidecar `<path>.schema.json` may pin feature kinds, arities and
/// the label column.
[[nodiscard]] Dataset load_csv(const std::filesystem::path &path, const std::string &label_column = "label");

/// Writes the CSV plus a schema sidecar so load_csv reproduces `ds` exactly.
void write_csv(const Dataset &ds, const std::filesystem::path &path, const std::string &label_column = "label");

/// Locates a named dataset: `$PROBSEL_DATA_DIR/<name>.csv` first, then the
/// data directory the library was built with. Throws DataError naming
/// PROBSEL_DATA_DIR when neither exists.
[[nodiscard]] std::filesystem::path resolve_data_file(const std::string &name);

/// Maps the nine 1..10 breast-cancer attributes to the binary indicators
/// (x1<=5, x2=1, x3=1, x4=1, x5<=2, x6=1, x7<=3, x8=1, x9=1).
[[nodiscard]] Dataset binarize_breast(const Dataset &raw);

/// Appends k Bernoulli(1/2) binary columns named x<d+1>..x<d+k>.
[[nodiscard]] Dataset augment_noise(const Dataset &ds, std::size_t k, std::uint64_t seed);

[[nodiscard]] Dataset gen_weston(std::size_t n, const std::vector<WestonFeatureSpec> &specs, double pos_fraction,
                                 std::uint64_t seed);

/// Five independent ternary features; only x1 carries label information.
[[nodiscard]] Dataset gen_nominal5(std::size_t n, SamplingMode mode, std::uint64_t seed);

/// Marginals of the five-feature nominal task (rows: features, columns: a,b,c).
[[nodiscard]] const std::vector<std::vector<double>> &nominal5_marginals();
/// P(y=1 | x1 = a,b,c).
[[nodiscard]] const std::vector<double> &nominal5_eta();

}  // namespace probsel
