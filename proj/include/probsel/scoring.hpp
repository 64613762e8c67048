#pragma once

#include "probsel/dataset.hpp"
#include "probsel/estimator.hpp"
#include "probsel/model.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string_view>
#include <vector>

namespace probsel {

enum class Criterion {
    ss,             ///< mean |P^(x) - P^(x^{-j})|, label-free
    sa,             ///< mean y (P^(x) - P^(x^{-j}))
    ssu,            ///< ss over labeled plus unlabeled examples
    abs_loss_drop,  ///< mean |t - P^(x^{-j})|, the absolute loss once j is gone
};

enum class ScoringMode {
    resubstitution,  ///< one fit, scored on the training rows
    loo,             ///< n fits, each scoring only its held-out row
};

[[nodiscard]] std::string_view to_string(Criterion c);
[[nodiscard]] Criterion criterion_from_string(std::string_view text);
[[nodiscard]] std::string_view to_string(ScoringMode m);
[[nodiscard]] ScoringMode scoring_mode_from_string(std::string_view text);

/// 0/1 coding of a {-1,+1} label.
[[nodiscard]] constexpr double target_code(int y) noexcept {
    return y > 0 ? 1.0 : 0.0;
}

/// One value per scored feature. `features` holds the original column
/// indices (they differ from 0..d-1 inside an elimination run).
struct FeatureScores {
    Criterion criterion{Criterion::ss};
    std::vector<std::size_t> features;
    std::vector<double> values;
    std::size_t n_labeled{0};
    std::size_t n_unlabeled{0};
    nlohmann::json estimator;
    /// LOO folds whose training part lacked a class; they contribute zero.
    std::size_t degenerate_folds{0};

    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] double shat_s(const ProbabilityModel &model, std::span<const RowView> xs, std::size_t j);
[[nodiscard]] double shat_a(const ProbabilityModel &model, std::span<const RowView> xs, std::span<const int> labels,
                            std::size_t j);
[[nodiscard]] double shat_su(const ProbabilityModel &model, std::span<const RowView> labeled,
                             std::span<const RowView> unlabeled, std::size_t j);
[[nodiscard]] double abs_loss_without(const ProbabilityModel &model, std::span<const RowView> xs,
                                      std::span<const int> labels, std::size_t j);
/// mean |t - P^(x)|; the j-free term of the absolute-loss decomposition.
[[nodiscard]] double abs_loss(const Predictor &model, std::span<const RowView> xs, std::span<const int> labels);

/// Scores every feature of `ds` with an already fitted model.
[[nodiscard]] FeatureScores score_with_model(const ProbabilityModel &model, const Dataset &ds, Criterion criterion);

/// Fits the configured estimator and scores every feature. ssu uses the
/// dataset's unlabeled pool and is only defined in resubstitution mode.
[[nodiscard]] FeatureScores score_features(const Dataset &ds, const EstimatorConfig &cfg, Criterion criterion,
                                           ScoringMode mode);

}  // namespace probsel
