#pragma once

#include "probsel/dataset.hpp"
#include "probsel/model.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

namespace probsel {

enum class EstimatorKind { nb, logreg, svm_platt };

/// How P^(y=1|x^{-j}) is obtained.
enum class RemovalStrategy {
    factor_drop,  ///< naive Bayes only: leave feature j's factor out
    retrain,      ///< refit the pipeline without column j
};

[[nodiscard]] std::string_view to_string(EstimatorKind kind);
[[nodiscard]] std::string_view to_string(RemovalStrategy removal);

struct EstimatorConfig {
    EstimatorKind estimator{EstimatorKind::nb};
    double alpha{1.0};
    double l2{1e-4};
    double lambda{1e-3};
    RemovalStrategy removal{RemovalStrategy::factor_drop};
    std::uint64_t seed{0};
    std::size_t epochs{20};
    std::size_t max_iters{10000};
    double tol{1e-8};

    /// Throws ConfigError for factor_drop with a non-NB estimator and for
    /// out-of-range parameters.
    void validate() const;

    /// Reads {"estimator","alpha","l2","lambda","removal","seed",...}. A
    /// missing "removal" defaults to factor_drop for nb and retrain otherwise.
    static EstimatorConfig from_json(const nlohmann::json &doc);
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Fits the base pipeline (no feature removal).
[[nodiscard]] std::unique_ptr<Predictor> fit_predictor(const Dataset &ds, const EstimatorConfig &cfg);

/// Full model plus one refit per removed column.
class RetrainModel final : public ProbabilityModel {
  public:
    RetrainModel(std::unique_ptr<Predictor> full, std::vector<std::unique_ptr<Predictor>> reduced);

    [[nodiscard]] double predict(const RowView &x) const override;
    [[nodiscard]] double predict_without(const RowView &x, std::size_t j) const override;

  private:
    std::unique_ptr<Predictor> full_;
    std::vector<std::unique_ptr<Predictor>> reduced_;
};

/// Fits the configured pipeline together with its removal strategy.
[[nodiscard]] std::unique_ptr<ProbabilityModel> fit_estimator(const Dataset &ds, const EstimatorConfig &cfg);

/// Refits the pipeline on `ds` without column j and predicts x without j.
[[nodiscard]] double predict_without_retrain(const Dataset &ds, const EstimatorConfig &cfg, const RowView &x,
                                             std::size_t j);

/// Copies `x` with coordinate j removed into the caller's buffers.
[[nodiscard]] RowView drop_coordinate(const RowView &x, std::size_t j, std::vector<double> &values,
                                      std::vector<std::uint8_t> &missing);

}  // namespace probsel
