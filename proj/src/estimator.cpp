#include "probsel/estimator.hpp"

#include "probsel/error.hpp"
#include "probsel/linear.hpp"
#include "probsel/naive_bayes.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace probsel {

std::string_view to_string(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::nb:
        return "nb";
    case EstimatorKind::logreg:
        return "logreg";
    case EstimatorKind::svm_platt:
        return "svm_platt";
    }
    return "nb";
}

std::string_view to_string(RemovalStrategy removal) {
    return removal == RemovalStrategy::factor_drop ? "factor_drop" : "retrain";
}

void EstimatorConfig::validate() const {
    if (removal == RemovalStrategy::factor_drop && estimator != EstimatorKind::nb) {
        throw ConfigError("factor_drop removal is only defined for the nb estimator");
    }
    if (!(alpha >= 0.0)) {
        throw ConfigError("alpha must be >= 0");
    }
    if (!(l2 >= 0.0)) {
        throw ConfigError("l2 must be >= 0");
    }
    if (!(lambda > 0.0)) {
        throw ConfigError("lambda must be > 0");
    }
    if (epochs == 0 || max_iters == 0 || !(tol > 0.0)) {
        throw ConfigError("epochs, max_iters and tol must be positive");
    }
}

EstimatorConfig EstimatorConfig::from_json(const nlohmann::json &doc) {
    EstimatorConfig cfg;
    if (!doc.is_object()) {
        throw ConfigError("estimator config must be a JSON object");
    }
    for (const auto &[key, value] : doc.items()) {
        static const char *const known[] = {"estimator", "removal", "alpha", "l2",       "lambda",
                                            "seed",      "epochs",  "max_iters", "tol"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigError("unknown estimator config key '" + key + "'");
        }
    }
    try {
        const std::string kind = doc.value("estimator", std::string("nb"));
        if (kind == "nb") {
            cfg.estimator = EstimatorKind::nb;
        } else if (kind == "logreg") {
            cfg.estimator = EstimatorKind::logreg;
        } else if (kind == "svm_platt") {
            cfg.estimator = EstimatorKind::svm_platt;
        } else {
            throw ConfigError("unknown estimator '" + kind + "'");
        }
        cfg.removal = cfg.estimator == EstimatorKind::nb ? RemovalStrategy::factor_drop : RemovalStrategy::retrain;
        if (doc.contains("removal")) {
            const std::string removal = doc.at("removal").get<std::string>();
            if (removal == "factor_drop") {
                cfg.removal = RemovalStrategy::factor_drop;
            } else if (removal == "retrain") {
                cfg.removal = RemovalStrategy::retrain;
            } else {
                throw ConfigError("unknown removal strategy '" + removal + "'");
            }
        }
        cfg.alpha = doc.value("alpha", cfg.alpha);
        cfg.l2 = doc.value("l2", cfg.l2);
        cfg.lambda = doc.value("lambda", cfg.lambda);
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.epochs = doc.value("epochs", cfg.epochs);
        cfg.max_iters = doc.value("max_iters", cfg.max_iters);
        cfg.tol = doc.value("tol", cfg.tol);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("bad estimator config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

nlohmann::json EstimatorConfig::to_json() const {
    return {{"estimator", to_string(estimator)},
            {"alpha", alpha},
            {"l2", l2},
            {"lambda", lambda},
            {"removal", to_string(removal)},
            {"seed", seed},
            {"epochs", epochs},
            {"max_iters", max_iters},
            {"tol", tol}};
}

std::unique_ptr<Predictor> fit_predictor(const Dataset &ds, const EstimatorConfig &cfg) {
    switch (cfg.estimator) {
    case EstimatorKind::nb:
        return std::make_unique<NaiveBayesModel>(nb_fit(ds, cfg.alpha));
    case EstimatorKind::logreg:
        return std::make_unique<LogisticModel>(logreg_fit(ds, cfg.l2, cfg.max_iters, cfg.tol).model);
    case EstimatorKind::svm_platt:
        return std::make_unique<SvmPlattModel>(svm_platt_fit(ds, cfg.lambda, cfg.epochs, cfg.seed));
    }
    throw ConfigError("unknown estimator");
}

RowView drop_coordinate(const RowView &x, std::size_t j, std::vector<double> &values,
                        std::vector<std::uint8_t> &missing) {
    values.clear();
    missing.clear();
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (k != j) {
            values.push_back(x.values[k]);
            missing.push_back(x.missing[k]);
        }
    }
    return {values, missing};
}

RetrainModel::RetrainModel(std::unique_ptr<Predictor> full, std::vector<std::unique_ptr<Predictor>> reduced)
    : full_(std::move(full)), reduced_(std::move(reduced)) {}

double RetrainModel::predict(const RowView &x) const {
    return full_->predict(x);
}

double RetrainModel::predict_without(const RowView &x, std::size_t j) const {
    if (j >= reduced_.size()) {
        throw DomainError("feature index " + std::to_string(j) + " out of range");
    }
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    return reduced_[j]->predict(drop_coordinate(x, j, values, missing));
}

std::unique_ptr<ProbabilityModel> fit_estimator(const Dataset &ds, const EstimatorConfig &cfg) {
    cfg.validate();
    if (cfg.removal == RemovalStrategy::factor_drop) {
        return std::make_unique<NaiveBayesModel>(nb_fit(ds, cfg.alpha));
    }
    std::unique_ptr<Predictor> full = fit_predictor(ds, cfg);
    std::vector<std::unique_ptr<Predictor>> reduced;
    reduced.reserve(ds.d());
    for (std::size_t j = 0; j < ds.d(); ++j) {
        reduced.push_back(fit_predictor(ds.without_column(j), cfg));
    }
    return std::make_unique<RetrainModel>(std::move(full), std::move(reduced));
}

double predict_without_retrain(const Dataset &ds, const EstimatorConfig &cfg, const RowView &x, std::size_t j) {
    if (j >= ds.d()) {
        throw DomainError("feature index " + std::to_string(j) + " out of range");
    }
    const std::unique_ptr<Predictor> reduced = fit_predictor(ds.without_column(j), cfg);
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    return reduced->predict(drop_coordinate(x, j, values, missing));
}

}  // namespace probsel
