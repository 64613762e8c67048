#pragma once

#include "probsel/dataset.hpp"

#include <cstddef>

namespace probsel {

/// Anything that estimates P^(y=1 | x).
class Predictor {
  public:
    virtual ~Predictor() = default;

    [[nodiscard]] virtual double predict(const RowView &x) const = 0;
};

/// Estimated class probabilities with and without a single feature.
/// Implementations are immutable after fitting and safe for concurrent use.
class ProbabilityModel : public Predictor {
  public:
    /// P^(y=1 | x^{-j}); `x` still carries all features.
    [[nodiscard]] virtual double predict_without(const RowView &x, std::size_t j) const = 0;
};

}  // namespace probsel
