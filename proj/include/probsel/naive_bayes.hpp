#pragma once

#include "probsel/dataset.hpp"
#include "probsel/model.hpp"

#include <array>
#include <vector>

namespace probsel {

/// Naive Bayes over nominal features with additive smoothing.
///
/// P^(y=1|x^{-j}) drops feature j's factor from the product, which is the
/// same treatment a missing cell gets. Both are exact marginalization under
/// the model's own independence assumption.
class NaiveBayesModel final : public ProbabilityModel {
  public:
    NaiveBayesModel(std::vector<FeatureMeta> meta, double alpha, std::array<double, 2> priors,
                    std::vector<std::array<std::vector<double>, 2>> conditionals);

    [[nodiscard]] double predict(const RowView &x) const override;
    [[nodiscard]] double predict_without(const RowView &x, std::size_t j) const override;

    /// Index 0 is y=-1, index 1 is y=+1.
    [[nodiscard]] const std::array<double, 2> &priors() const noexcept { return priors_; }
    /// Smoothed P(x^j = v | y); cls is 0 for y=-1 and 1 for y=+1.
    [[nodiscard]] double conditional(std::size_t j, int cls, int v) const;
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] std::size_t d() const noexcept { return meta_.size(); }

  private:
    static constexpr std::size_t no_skip = static_cast<std::size_t>(-1);
    double posterior(const RowView &x, std::size_t skip) const;

    std::vector<FeatureMeta> meta_;
    double alpha_;
    std::array<double, 2> priors_;
    std::vector<std::array<std::vector<double>, 2>> log_cond_;
};

/// Priors are class frequencies; conditionals are
/// (count + alpha) / (class count + alpha * arity), skipping missing cells.
/// Throws FitError when a class is absent and TypeError on continuous features.
[[nodiscard]] NaiveBayesModel nb_fit(const Dataset &ds, double alpha);

}  // namespace probsel
