#include "probsel/scoring.hpp"

#include "probsel/error.hpp"
#include "probsel/numeric.hpp"

#include <cmath>
#include <numeric>

namespace probsel {

namespace {

void check_feature(const std::span<const RowView> xs, std::size_t j) {
    if (!xs.empty() && j >= xs.front().size()) {
        throw DomainError("feature index " + std::to_string(j) + " out of range");
    }
}

void check_labels(std::span<const RowView> xs, std::span<const int> labels) {
    if (xs.size() != labels.size()) {
        throw DomainError("examples and labels differ in length");
    }
    if (xs.empty()) {
        throw DomainError("cannot score an empty example set");
    }
}

/// Per-example contribution to a criterion.
double contribution(Criterion c, double p_full, double p_without, int y) {
    switch (c) {
    case Criterion::ss:
    case Criterion::ssu:
        return std::abs(p_full - p_without);
    case Criterion::sa:
        return static_cast<double>(y) * (p_full - p_without);
    case Criterion::abs_loss_drop:
        return std::abs(target_code(y) - p_without);
    }
    return 0.0;
}

}  // namespace

std::string_view to_string(Criterion c) {
    switch (c) {
    case Criterion::ss:
        return "ss";
    case Criterion::sa:
        return "sa";
    case Criterion::ssu:
        return "ssu";
    case Criterion::abs_loss_drop:
        return "abs_loss_drop";
    }
    return "ss";
}

Criterion criterion_from_string(std::string_view text) {
    if (text == "ss") {
        return Criterion::ss;
    }
    if (text == "sa") {
        return Criterion::sa;
    }
    if (text == "ssu") {
        return Criterion::ssu;
    }
    if (text == "abs_loss_drop") {
        return Criterion::abs_loss_drop;
    }
    throw ConfigError("unknown criterion '" + std::string(text) + "'");
}

std::string_view to_string(ScoringMode m) {
    return m == ScoringMode::loo ? "loo" : "resub";
}

ScoringMode scoring_mode_from_string(std::string_view text) {
    if (text == "resub" || text == "resubstitution") {
        return ScoringMode::resubstitution;
    }
    if (text == "loo") {
        return ScoringMode::loo;
    }
    throw ConfigError("unknown scoring mode '" + std::string(text) + "'");
}

nlohmann::json FeatureScores::to_json() const {
    nlohmann::json values_json = nlohmann::json::object();
    for (std::size_t k = 0; k < features.size(); ++k) {
        values_json[std::to_string(features[k])] = values[k];
    }
    return {{"criterion", to_string(criterion)},
            {"features", features},
            {"values", values_json},
            {"n_labeled", n_labeled},
            {"n_unlabeled", n_unlabeled},
            {"estimator", estimator},
            {"degenerate_folds", degenerate_folds}};
}

double shat_s(const ProbabilityModel &model, std::span<const RowView> xs, std::size_t j) {
    if (xs.empty()) {
        throw DomainError("shat_s needs at least one example");
    }
    check_feature(xs, j);
    CompensatedSum sum;
    for (const RowView &x : xs) {
        sum += std::abs(model.predict(x) - model.predict_without(x, j));
    }
    return sum.value() / static_cast<double>(xs.size());
}

double shat_a(const ProbabilityModel &model, std::span<const RowView> xs, std::span<const int> labels,
              std::size_t j) {
    check_labels(xs, labels);
    check_feature(xs, j);
    CompensatedSum sum;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sum += static_cast<double>(labels[i]) * (model.predict(xs[i]) - model.predict_without(xs[i], j));
    }
    return sum.value() / static_cast<double>(xs.size());
}

double shat_su(const ProbabilityModel &model, std::span<const RowView> labeled, std::span<const RowView> unlabeled,
               std::size_t j) {
    if (labeled.empty() && unlabeled.empty()) {
        throw DomainError("shat_su needs a nonempty labeled or unlabeled pool");
    }
    check_feature(labeled, j);
    check_feature(unlabeled, j);
    CompensatedSum sum;
    for (const RowView &x : labeled) {
        sum += std::abs(model.predict(x) - model.predict_without(x, j));
    }
    for (const RowView &x : unlabeled) {
        sum += std::abs(model.predict(x) - model.predict_without(x, j));
    }
    return sum.value() / static_cast<double>(labeled.size() + unlabeled.size());
}

double abs_loss_without(const ProbabilityModel &model, std::span<const RowView> xs, std::span<const int> labels,
                        std::size_t j) {
    check_labels(xs, labels);
    check_feature(xs, j);
    CompensatedSum sum;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sum += std::abs(target_code(labels[i]) - model.predict_without(xs[i], j));
    }
    return sum.value() / static_cast<double>(xs.size());
}

double abs_loss(const Predictor &model, std::span<const RowView> xs, std::span<const int> labels) {
    check_labels(xs, labels);
    CompensatedSum sum;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sum += std::abs(target_code(labels[i]) - model.predict(xs[i]));
    }
    return sum.value() / static_cast<double>(xs.size());
}

FeatureScores score_with_model(const ProbabilityModel &model, const Dataset &ds, Criterion criterion) {
    FeatureScores out;
    out.criterion = criterion;
    out.features.resize(ds.d());
    std::iota(out.features.begin(), out.features.end(), std::size_t{0});
    out.values.resize(ds.d());
    out.n_labeled = ds.n();
    const std::vector<RowView> labeled = ds.labeled_rows();
    std::vector<RowView> unlabeled;
    if (criterion == Criterion::ssu) {
        unlabeled = ds.unlabeled_rows();
        out.n_unlabeled = unlabeled.size();
    }
    for (std::size_t j = 0; j < ds.d(); ++j) {
        switch (criterion) {
        case Criterion::ss:
            out.values[j] = shat_s(model, labeled, j);
            break;
        case Criterion::sa:
            out.values[j] = shat_a(model, labeled, ds.labels(), j);
            break;
        case Criterion::ssu:
            out.values[j] = shat_su(model, labeled, unlabeled, j);
            break;
        case Criterion::abs_loss_drop:
            out.values[j] = abs_loss_without(model, labeled, ds.labels(), j);
            break;
        }
    }
    return out;
}

FeatureScores score_features(const Dataset &ds, const EstimatorConfig &cfg, Criterion criterion, ScoringMode mode) {
    cfg.validate();
    if (mode == ScoringMode::resubstitution) {
        const auto model = fit_estimator(ds, cfg);
        FeatureScores out = score_with_model(*model, ds, criterion);
        out.estimator = cfg.to_json();
        return out;
    }

    if (criterion == Criterion::ssu) {
        throw ConfigError("ssu scoring is only defined in resubstitution mode");
    }
    if (ds.n() < 2) {
        throw DomainError("leave-one-out scoring needs at least two examples");
    }
    FeatureScores out;
    out.criterion = criterion;
    out.features.resize(ds.d());
    std::iota(out.features.begin(), out.features.end(), std::size_t{0});
    out.n_labeled = ds.n();
    out.estimator = cfg.to_json();
    std::vector<CompensatedSum> sums(ds.d());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const Dataset train = ds.without_row(i);
        if (train.count_label(1) == 0 || train.count_label(-1) == 0) {
            // Prior-only prediction: P^(x) = P^(x^{-j}) for every j.
            ++out.degenerate_folds;
            if (criterion == Criterion::abs_loss_drop) {
                const double prior = train.count_label(1) > 0 ? 1.0 : 0.0;
                for (std::size_t j = 0; j < ds.d(); ++j) {
                    sums[j] += std::abs(target_code(ds.label(i)) - prior);
                }
            }
            continue;
        }
        const auto model = fit_estimator(train, cfg);
        const RowView x = ds.row(i);
        const double p_full = model->predict(x);
        for (std::size_t j = 0; j < ds.d(); ++j) {
            sums[j] += contribution(criterion, p_full, model->predict_without(x, j), ds.label(i));
        }
    }
    out.values.resize(ds.d());
    for (std::size_t j = 0; j < ds.d(); ++j) {
        out.values[j] = sums[j].value() / static_cast<double>(ds.n());
    }
    return out;
}

}  // namespace probsel
