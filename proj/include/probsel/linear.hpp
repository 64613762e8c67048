#pragma once

#include "probsel/dataset.hpp"
#include "probsel/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace probsel {

enum class LinearKind { logistic, hinge };

struct LinearModel {
    std::vector<double> weights;
    double bias{0.0};
    LinearKind kind{LinearKind::logistic};

    [[nodiscard]] double decision(const RowView &x) const;
};

struct LogisticFit {
    LinearModel model;
    bool converged{false};
    std::size_t iterations{0};
    double gradient_norm{0.0};
};

/// Mean log-likelihood minus (l2/2)||w||^2; the bias is not penalized.
[[nodiscard]] double logreg_objective(const Dataset &ds, const LinearModel &m, double l2);
/// Gradient of logreg_objective: d weight partials followed by the bias partial.
[[nodiscard]] std::vector<double> logreg_gradient(const Dataset &ds, const LinearModel &m, double l2);

/// Full-batch gradient ascent with Barzilai-Borwein steps and Armijo
/// backtracking, stopping once the gradient norm drops below `tol`.
/// Separable data at l2 = 0 returns with converged = false.
[[nodiscard]] LogisticFit logreg_fit(const Dataset &ds, double l2, std::size_t max_iters, double tol);

/// (lambda/2)||w||^2 + mean hinge loss, with the bias folded into w as a
/// constant feature.
[[nodiscard]] double svm_objective(const Dataset &ds, const LinearModel &m, double lambda);
[[nodiscard]] double mean_hinge_loss(const Dataset &ds, const LinearModel &m);

/// Stochastic subgradient descent with step 1/(lambda t) and projection onto
/// the ball of radius 1/sqrt(lambda); returns the average of the iterates
/// over the second half of training.
[[nodiscard]] LinearModel svm_fit(const Dataset &ds, double lambda, std::size_t epochs, std::uint64_t seed);

/// P^(y=1 | f) = 1 / (1 + exp(A f + B)).
struct PlattCalibration {
    double a{0.0};
    double b{0.0};

    [[nodiscard]] double probability(double margin) const;
};

/// Platt's regularized cross-entropy fit, solved by Newton's method with
/// backtracking. Throws FitError when a class is missing or the iteration
/// leaves the finite range.
[[nodiscard]] PlattCalibration platt_fit(std::span<const double> margins, std::span<const int> labels);

class LogisticModel final : public Predictor {
  public:
    explicit LogisticModel(LinearModel model) : model_(std::move(model)) {}
    [[nodiscard]] double predict(const RowView &x) const override;
    [[nodiscard]] const LinearModel &model() const noexcept { return model_; }

  private:
    LinearModel model_;
};

/// Hinge-loss classifier whose decision values are mapped through a Platt
/// sigmoid.
class SvmPlattModel final : public Predictor {
  public:
    SvmPlattModel(LinearModel svm, PlattCalibration calibration)
        : svm_(std::move(svm)), calibration_(calibration) {}
    [[nodiscard]] double predict(const RowView &x) const override;
    [[nodiscard]] const LinearModel &svm() const noexcept { return svm_; }
    [[nodiscard]] const PlattCalibration &calibration() const noexcept { return calibration_; }

  private:
    LinearModel svm_;
    PlattCalibration calibration_;
};

/// Fits the SVM on all rows and calibrates on decision values obtained by a
/// 3-fold class-stratified cross-fit, so calibration never sees in-sample margins.
[[nodiscard]] SvmPlattModel svm_platt_fit(const Dataset &ds, double lambda, std::size_t epochs, std::uint64_t seed);

}  // namespace probsel
