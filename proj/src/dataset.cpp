#include "probsel/dataset.hpp"

#include "probsel/error.hpp"
#include "probsel/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace probsel {

namespace {

constexpr double missing_value = 0.0;

void fill_row(const std::vector<double> &src, std::size_t d, std::vector<double> &values,
              std::vector<std::uint8_t> &missing) {
    if (src.size() != d) {
        throw ShapeError("row has " + std::to_string(src.size()) + " values, expected " + std::to_string(d));
    }
    for (const double v : src) {
        const bool is_missing = std::isnan(v);
        values.push_back(is_missing ? missing_value : v);
        missing.push_back(is_missing ? 1 : 0);
    }
}

void check_cells(const std::vector<FeatureMeta> &meta, std::span<const double> values,
                 std::span<const std::uint8_t> missing, const char *pool) {
    const std::size_t d = meta.size();
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (missing[k]) {
            continue;
        }
        const FeatureMeta &f = meta[k % d];
        const double v = values[k];
        if (!std::isfinite(v)) {
            throw SchemaError(std::string("non-finite value in ") + pool + " feature '" + f.name + "'");
        }
        if (f.is_nominal() && (v != std::floor(v) || v < 0.0 || v >= static_cast<double>(f.arity))) {
            throw SchemaError(std::string("nominal value out of range in ") + pool + " feature '" + f.name +
                              "': " + std::to_string(v));
        }
    }
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string &line) {
    std::vector<std::string> out;
    std::string_view rest(line);
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::optional<long long> parse_integer(const std::string &token) {
    long long v = 0;
    const char *first = token.data();
    const char *last = token.data() + token.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) {
        return std::nullopt;
    }
    return v;
}

std::optional<double> parse_real(const std::string &token) {
    if (token.empty()) {
        return std::nullopt;
    }
    char *end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) {
        return std::nullopt;
    }
    return v;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json schema_json(const Dataset &ds, const std::string &label_column) {
    nlohmann::json features = nlohmann::json::array();
    for (const FeatureMeta &f : ds.meta()) {
        if (f.is_nominal()) {
            features.push_back({{"name", f.name}, {"kind", "nominal"}, {"arity", f.arity}});
        } else {
            features.push_back({{"name", f.name}, {"kind", "continuous"}});
        }
    }
    return {{"label_column", label_column}, {"features", features}};
}

std::filesystem::path sidecar_path(const std::filesystem::path &path) {
    return std::filesystem::path(path.string() + ".schema.json");
}

}  // namespace

std::string_view to_string(SamplingMode mode) {
    switch (mode) {
    case SamplingMode::proportional:
        return "proportional";
    case SamplingMode::oversample:
        return "oversample";
    case SamplingMode::undersample:
        return "undersample";
    }
    return "proportional";
}

SamplingMode sampling_mode_from_string(std::string_view text) {
    if (text == "proportional") {
        return SamplingMode::proportional;
    }
    if (text == "oversample") {
        return SamplingMode::oversample;
    }
    if (text == "undersample") {
        return SamplingMode::undersample;
    }
    throw ConfigError("unknown sampling mode '" + std::string(text) + "'");
}

Dataset::Dataset(std::vector<FeatureMeta> meta, const std::vector<std::vector<double>> &rows, std::vector<int> labels,
                 const std::vector<std::vector<double>> &unlabeled)
    : meta_(std::move(meta)), labels_(std::move(labels)) {
    if (rows.size() != labels_.size()) {
        throw ShapeError("labels length " + std::to_string(labels_.size()) + " != rows length " +
                         std::to_string(rows.size()));
    }
    values_.reserve(rows.size() * d());
    missing_.reserve(rows.size() * d());
    for (const auto &r : rows) {
        fill_row(r, d(), values_, missing_);
    }
    for (const auto &r : unlabeled) {
        fill_row(r, d(), unl_values_, unl_missing_);
    }
    unl_count_ = unlabeled.size();
    validate();
}

void Dataset::validate() const {
    std::set<std::string> names;
    for (const FeatureMeta &f : meta_) {
        if (!names.insert(f.name).second) {
            throw SchemaError("duplicate feature name '" + f.name + "'");
        }
        if (f.is_nominal() && f.arity < 2) {
            throw SchemaError("nominal feature '" + f.name + "' needs arity >= 2");
        }
    }
    for (const int y : labels_) {
        if (y != -1 && y != 1) {
            throw SchemaError("label must be -1 or +1, got " + std::to_string(y));
        }
    }
    check_cells(meta_, values_, missing_, "labeled");
    check_cells(meta_, unl_values_, unl_missing_, "unlabeled");
}

RowView Dataset::row(std::size_t i) const {
    const std::size_t off = i * d();
    return {std::span<const double>(values_).subspan(off, d()),
            std::span<const std::uint8_t>(missing_).subspan(off, d())};
}

RowView Dataset::unlabeled_row(std::size_t i) const {
    const std::size_t off = i * d();
    return {std::span<const double>(unl_values_).subspan(off, d()),
            std::span<const std::uint8_t>(unl_missing_).subspan(off, d())};
}

std::vector<RowView> Dataset::labeled_rows() const {
    std::vector<RowView> out;
    out.reserve(n());
    for (std::size_t i = 0; i < n(); ++i) {
        out.push_back(row(i));
    }
    return out;
}

std::vector<RowView> Dataset::unlabeled_rows() const {
    std::vector<RowView> out;
    out.reserve(n_unlabeled());
    for (std::size_t i = 0; i < n_unlabeled(); ++i) {
        out.push_back(unlabeled_row(i));
    }
    return out;
}

std::size_t Dataset::count_label(int y) const noexcept {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), y));
}

std::size_t Dataset::missing_count() const noexcept {
    return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), 1) +
                                    std::count(unl_missing_.begin(), unl_missing_.end(), 1));
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
    Dataset out;
    out.meta_ = meta_;
    out.values_.reserve(indices.size() * d());
    out.missing_.reserve(indices.size() * d());
    out.labels_.reserve(indices.size());
    for (const std::size_t i : indices) {
        if (i >= n()) {
            throw DomainError("row index " + std::to_string(i) + " out of range");
        }
        const RowView r = row(i);
        out.values_.insert(out.values_.end(), r.values.begin(), r.values.end());
        out.missing_.insert(out.missing_.end(), r.missing.begin(), r.missing.end());
        out.labels_.push_back(labels_[i]);
    }
    out.unl_values_ = unl_values_;
    out.unl_missing_ = unl_missing_;
    out.unl_count_ = unl_count_;
    return out;
}

Dataset Dataset::without_row(std::size_t i) const {
    std::vector<std::size_t> keep;
    keep.reserve(n());
    for (std::size_t k = 0; k < n(); ++k) {
        if (k != i) {
            keep.push_back(k);
        }
    }
    return select_rows(keep);
}

Dataset Dataset::select_columns(std::span<const std::size_t> columns) const {
    Dataset out;
    for (const std::size_t c : columns) {
        if (c >= d()) {
            throw DomainError("column index " + std::to_string(c) + " out of range");
        }
        out.meta_.push_back(meta_[c]);
    }
    const auto copy = [&](const std::vector<double> &vals, const std::vector<std::uint8_t> &miss, std::size_t rows,
                          std::vector<double> &ov, std::vector<std::uint8_t> &om) {
        ov.reserve(rows * columns.size());
        om.reserve(rows * columns.size());
        for (std::size_t i = 0; i < rows; ++i) {
            for (const std::size_t c : columns) {
                ov.push_back(vals[i * d() + c]);
                om.push_back(miss[i * d() + c]);
            }
        }
    };
    copy(values_, missing_, n(), out.values_, out.missing_);
    copy(unl_values_, unl_missing_, unl_count_, out.unl_values_, out.unl_missing_);
    out.labels_ = labels_;
    out.unl_count_ = unl_count_;
    out.validate();
    return out;
}

Dataset Dataset::without_column(std::size_t j) const {
    if (j >= d()) {
        throw DomainError("column index " + std::to_string(j) + " out of range");
    }
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < d(); ++k) {
        if (k != j) {
            keep.push_back(k);
        }
    }
    return select_columns(keep);
}

Dataset Dataset::with_unlabeled(const Dataset &pool) const {
    if (pool.meta() != meta_) {
        throw SchemaError("unlabeled pool does not share the dataset's feature metadata");
    }
    Dataset out = *this;
    // Both parts of the pool count as unlabeled; its labels are discarded.
    out.unl_values_ = pool.values_;
    out.unl_values_.insert(out.unl_values_.end(), pool.unl_values_.begin(), pool.unl_values_.end());
    out.unl_missing_ = pool.missing_;
    out.unl_missing_.insert(out.unl_missing_.end(), pool.unl_missing_.begin(), pool.unl_missing_.end());
    out.unl_count_ = pool.n() + pool.n_unlabeled();
    return out;
}

Dataset Dataset::with_appended_columns(const std::vector<FeatureMeta> &meta, std::span<const double> extra,
                                       std::span<const double> extra_unlabeled) const {
    const std::size_t k = meta.size();
    if (extra.size() != n() * k || extra_unlabeled.size() != unl_count_ * k) {
        throw ShapeError("appended columns do not match the row counts");
    }
    Dataset out;
    out.meta_ = meta_;
    out.meta_.insert(out.meta_.end(), meta.begin(), meta.end());
    const auto merge = [&](const std::vector<double> &vals, const std::vector<std::uint8_t> &miss,
                           std::span<const double> add, std::size_t rows, std::vector<double> &ov,
                           std::vector<std::uint8_t> &om) {
        for (std::size_t i = 0; i < rows; ++i) {
            ov.insert(ov.end(), vals.begin() + static_cast<std::ptrdiff_t>(i * d()),
                      vals.begin() + static_cast<std::ptrdiff_t>((i + 1) * d()));
            om.insert(om.end(), miss.begin() + static_cast<std::ptrdiff_t>(i * d()),
                      miss.begin() + static_cast<std::ptrdiff_t>((i + 1) * d()));
            for (std::size_t c = 0; c < k; ++c) {
                ov.push_back(add[i * k + c]);
                om.push_back(0);
            }
        }
    };
    merge(values_, missing_, extra, n(), out.values_, out.missing_);
    merge(unl_values_, unl_missing_, extra_unlabeled, unl_count_, out.unl_values_, out.unl_missing_);
    out.labels_ = labels_;
    out.unl_count_ = unl_count_;
    out.validate();
    return out;
}

Dataset load_csv(const std::filesystem::path &path, const std::string &label_column) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open dataset file '" + path.string() + "'");
    }

    std::optional<nlohmann::json> schema;
    if (const auto side = sidecar_path(path); std::filesystem::exists(side)) {
        std::ifstream sin(side);
        try {
            schema = nlohmann::json::parse(sin);
        } catch (const nlohmann::json::exception &e) {
            throw ParseError("bad schema sidecar '" + side.string() + "': " + e.what());
        }
    }
    std::string label_name = label_column;
    if (schema && schema->contains("label_column")) {
        label_name = schema->at("label_column").get<std::string>();
    }

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError("missing header row", 1);
    }
    ++line_no;
    const std::vector<std::string> header = split_line(line);
    const auto label_it = std::find(header.begin(), header.end(), label_name);
    if (label_it == header.end()) {
        throw SchemaError("label column '" + label_name + "' not found in header");
    }
    const auto label_pos = static_cast<std::size_t>(label_it - header.begin());
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_pos) {
            names.push_back(header[c]);
        }
    }
    const std::size_t d = names.size();

    struct Raw {
        std::vector<std::string> cells;
        std::size_t line;
    };
    std::vector<Raw> labeled;
    std::vector<Raw> unlabeled;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> tokens = split_line(line);
        if (tokens.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(tokens.size()),
                             line_no);
        }
        const std::string label_tok = tokens[label_pos];
        tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(label_pos));
        if (label_tok == "?") {
            unlabeled.push_back({std::move(tokens), line_no});
        } else if (label_tok == "+1" || label_tok == "1") {
            labeled.push_back({std::move(tokens), line_no});
            labels.push_back(1);
        } else if (label_tok == "-1") {
            labeled.push_back({std::move(tokens), line_no});
            labels.push_back(-1);
        } else {
            throw SchemaError("unknown label token '" + label_tok + "' (line " + std::to_string(line_no) + ")");
        }
    }

    const auto parse_rows = [&](const std::vector<Raw> &raws) {
        std::vector<std::vector<double>> rows;
        rows.reserve(raws.size());
        for (const Raw &r : raws) {
            std::vector<double> v(d);
            for (std::size_t j = 0; j < d; ++j) {
                const std::string &tok = r.cells[j];
                if (tok == "?") {
                    v[j] = std::numeric_limits<double>::quiet_NaN();
                    continue;
                }
                const auto x = parse_real(tok);
                if (!x) {
                    throw ParseError("bad numeric token '" + tok + "'", r.line);
                }
                v[j] = *x;
            }
            rows.push_back(std::move(v));
        }
        return rows;
    };
    std::vector<std::vector<double>> rows = parse_rows(labeled);
    std::vector<std::vector<double>> unl_rows = parse_rows(unlabeled);

    std::vector<FeatureMeta> meta;
    if (schema) {
        const auto &feats = schema->at("features");
        if (feats.size() != d) {
            throw SchemaError("schema sidecar lists " + std::to_string(feats.size()) + " features, file has " +
                              std::to_string(d));
        }
        for (std::size_t j = 0; j < d; ++j) {
            const auto &f = feats[j];
            const std::string name = f.value("name", names[j]);
            if (name != names[j]) {
                throw SchemaError("schema feature '" + name + "' does not match header '" + names[j] + "'");
            }
            if (f.value("kind", std::string("nominal")) == "continuous") {
                meta.push_back(FeatureMeta::continuous(name));
            } else {
                meta.push_back(FeatureMeta::nominal(name, f.at("arity").get<int>()));
            }
        }
    } else {
        // Columns whose present tokens are all non-negative integers are nominal.
        for (std::size_t j = 0; j < d; ++j) {
            bool integral = true;
            bool any = false;
            long long max_code = 0;
            const auto scan = [&](const std::vector<Raw> &raws) {
                for (const Raw &r : raws) {
                    const std::string &tok = r.cells[j];
                    if (tok == "?") {
                        continue;
                    }
                    any = true;
                    const auto v = parse_integer(tok);
                    if (!v || *v < 0) {
                        integral = false;
                        return;
                    }
                    max_code = std::max(max_code, *v);
                }
            };
            scan(labeled);
            if (integral) {
                scan(unlabeled);
            }
            if (any && integral) {
                meta.push_back(FeatureMeta::nominal(names[j], static_cast<int>(std::max<long long>(2, max_code + 1))));
            } else {
                meta.push_back(FeatureMeta::continuous(names[j]));
            }
        }
    }
    return Dataset(std::move(meta), rows, std::move(labels), unl_rows);
}

void write_csv(const Dataset &ds, const std::filesystem::path &path, const std::string &label_column) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write dataset file '" + path.string() + "'");
    }
    for (const FeatureMeta &f : ds.meta()) {
        out << f.name << ',';
    }
    out << label_column << '\n';
    const auto write_row = [&](const RowView &r, const std::string &label) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (r.is_missing(j)) {
                out << '?';
            } else if (ds.feature(j).is_nominal()) {
                out << static_cast<long long>(r[j]);
            } else {
                out << format_real(r[j]);
            }
            out << ',';
        }
        out << label << '\n';
    };
    for (std::size_t i = 0; i < ds.n(); ++i) {
        write_row(ds.row(i), ds.label(i) > 0 ? "+1" : "-1");
    }
    for (std::size_t i = 0; i < ds.n_unlabeled(); ++i) {
        write_row(ds.unlabeled_row(i), "?");
    }
    std::ofstream side(sidecar_path(path));
    side << schema_json(ds, label_column).dump(2) << '\n';
}

std::filesystem::path resolve_data_file(const std::string &name) {
    const std::string file = name.ends_with(".csv") ? name : name + ".csv";
    if (const char *dir = std::getenv("PROBSEL_DATA_DIR"); dir != nullptr && *dir != '\0') {
        const std::filesystem::path p = std::filesystem::path(dir) / file;
        if (std::filesystem::exists(p)) {
            return p;
        }
    }
#ifdef PROBSEL_DEFAULT_DATA_DIR
    if (const std::filesystem::path p = std::filesystem::path(PROBSEL_DEFAULT_DATA_DIR) / file;
        std::filesystem::exists(p)) {
        return p;
    }
#endif
    throw DataError("dataset '" + file + "' not found; set PROBSEL_DATA_DIR to the directory containing it");
}

Dataset binarize_breast(const Dataset &raw) {
    if (raw.d() != 9) {
        throw ShapeError("breast-cancer binarization needs 9 features, got " + std::to_string(raw.d()));
    }
    enum class Op { le, eq };
    struct Threshold {
        Op op;
        double t;
    };
    static constexpr Threshold thresholds[9] = {{Op::le, 5}, {Op::eq, 1}, {Op::eq, 1}, {Op::eq, 1}, {Op::le, 2},
                                                {Op::eq, 1}, {Op::le, 3}, {Op::eq, 1}, {Op::eq, 1}};
    std::vector<FeatureMeta> meta;
    for (const FeatureMeta &f : raw.meta()) {
        meta.push_back(FeatureMeta::nominal(f.name, 2));
    }
    const auto convert = [&](const RowView &r) {
        std::vector<double> v(9);
        for (std::size_t j = 0; j < 9; ++j) {
            if (r.is_missing(j)) {
                v[j] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const double x = r[j];
            if (x != std::floor(x) || x < 1.0 || x > 10.0) {
                throw SchemaError("breast-cancer value outside 1..10 in feature '" + raw.feature(j).name + "'");
            }
            const bool on = thresholds[j].op == Op::le ? x <= thresholds[j].t : x == thresholds[j].t;
            v[j] = on ? 1.0 : 0.0;
        }
        return v;
    };
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<double>> unl;
    for (std::size_t i = 0; i < raw.n(); ++i) {
        rows.push_back(convert(raw.row(i)));
    }
    for (std::size_t i = 0; i < raw.n_unlabeled(); ++i) {
        unl.push_back(convert(raw.unlabeled_row(i)));
    }
    return Dataset(std::move(meta), rows, std::vector<int>(raw.labels().begin(), raw.labels().end()), unl);
}

Dataset augment_noise(const Dataset &ds, std::size_t k, std::uint64_t seed) {
    if (k == 0) {
        return ds;
    }
    Rng rng(seed);
    std::vector<FeatureMeta> meta;
    for (std::size_t c = 0; c < k; ++c) {
        meta.push_back(FeatureMeta::nominal("x" + std::to_string(ds.d() + c + 1), 2));
    }
    std::vector<double> extra(ds.n() * k);
    std::vector<double> extra_unl(ds.n_unlabeled() * k);
    for (double &v : extra) {
        v = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    for (double &v : extra_unl) {
        v = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    return ds.with_appended_columns(meta, extra, extra_unl);
}

}  // namespace probsel
