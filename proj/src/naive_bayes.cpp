#include "probsel/naive_bayes.hpp"

#include "probsel/error.hpp"

#include <cmath>
#include <limits>

namespace probsel {

NaiveBayesModel::NaiveBayesModel(std::vector<FeatureMeta> meta, double alpha, std::array<double, 2> priors,
                                 std::vector<std::array<std::vector<double>, 2>> conditionals)
    : meta_(std::move(meta)), alpha_(alpha), priors_(priors), log_cond_(std::move(conditionals)) {
    if (log_cond_.size() != meta_.size()) {
        throw ShapeError("one conditional table per feature expected");
    }
    for (auto &per_class : log_cond_) {
        for (auto &table : per_class) {
            for (double &p : table) {
                p = std::log(p);
            }
        }
    }
}

double NaiveBayesModel::conditional(std::size_t j, int cls, int v) const {
    return std::exp(log_cond_.at(j).at(static_cast<std::size_t>(cls)).at(static_cast<std::size_t>(v)));
}

double NaiveBayesModel::posterior(const RowView &x, std::size_t skip) const {
    if (x.size() != meta_.size()) {
        throw ShapeError("example has " + std::to_string(x.size()) + " features, model expects " +
                         std::to_string(meta_.size()));
    }
    double lp_neg = std::log(priors_[0]);
    double lp_pos = std::log(priors_[1]);
    for (std::size_t j = 0; j < meta_.size(); ++j) {
        if (j == skip || x.is_missing(j)) {
            continue;
        }
        const double v = x[j];
        if (v < 0.0 || v >= static_cast<double>(meta_[j].arity)) {
            throw DomainError("value out of range for feature '" + meta_[j].name + "'");
        }
        const auto code = static_cast<std::size_t>(v);
        lp_neg += log_cond_[j][0][code];
        lp_pos += log_cond_[j][1][code];
    }
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (lp_neg == neg_inf && lp_pos == neg_inf) {
        throw DegenerateInputError("both class posteriors are zero (unseen value with alpha = 0)");
    }
    if (lp_pos == neg_inf) {
        return 0.0;
    }
    if (lp_neg == neg_inf) {
        return 1.0;
    }
    return 1.0 / (1.0 + std::exp(lp_neg - lp_pos));
}

double NaiveBayesModel::predict(const RowView &x) const {
    return posterior(x, no_skip);
}

double NaiveBayesModel::predict_without(const RowView &x, std::size_t j) const {
    if (j >= meta_.size()) {
        throw DomainError("feature index " + std::to_string(j) + " out of range");
    }
    return posterior(x, j);
}

NaiveBayesModel nb_fit(const Dataset &ds, double alpha) {
    if (!(alpha >= 0.0)) {
        throw ConfigError("smoothing alpha must be >= 0");
    }
    for (const FeatureMeta &f : ds.meta()) {
        if (!f.is_nominal()) {
            throw TypeError("naive Bayes needs nominal features; '" + f.name + "' is continuous");
        }
    }
    const std::size_t n_pos = ds.count_label(1);
    const std::size_t n_neg = ds.count_label(-1);
    if (n_pos == 0 || n_neg == 0) {
        throw FitError("naive Bayes fit needs both classes present");
    }
    const double n = static_cast<double>(ds.n());
    const std::array<double, 2> priors = {static_cast<double>(n_neg) / n, static_cast<double>(n_pos) / n};

    std::vector<std::array<std::vector<double>, 2>> counts(ds.d());
    std::vector<std::array<double, 2>> present(ds.d(), {0.0, 0.0});
    for (std::size_t j = 0; j < ds.d(); ++j) {
        const auto arity = static_cast<std::size_t>(ds.feature(j).arity);
        counts[j][0].assign(arity, 0.0);
        counts[j][1].assign(arity, 0.0);
    }
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const RowView r = ds.row(i);
        const std::size_t cls = ds.label(i) > 0 ? 1 : 0;
        for (std::size_t j = 0; j < ds.d(); ++j) {
            if (r.is_missing(j)) {
                continue;
            }
            counts[j][cls][static_cast<std::size_t>(r[j])] += 1.0;
            present[j][cls] += 1.0;
        }
    }
    for (std::size_t j = 0; j < ds.d(); ++j) {
        const double arity = static_cast<double>(ds.feature(j).arity);
        for (std::size_t cls = 0; cls < 2; ++cls) {
            const double denom = present[j][cls] + alpha * arity;
            for (double &c : counts[j][cls]) {
                // A class with no observed values for this feature (all masked,
                // alpha = 0) has no information; fall back to uniform.
                c = denom > 0.0 ? (c + alpha) / denom : 1.0 / arity;
            }
        }
    }
    return NaiveBayesModel(ds.meta(), alpha, priors, std::move(counts));
}

}  // namespace probsel
