#pragma once

#include "probsel/dataset.hpp"
#include "probsel/model.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <vector>

namespace probsel {

/// One cell of an enumerable task: a value tuple, its mass p(x) and
/// eta(x) = P(y=1|x).
struct JointCell {
    std::vector<int> values;
    double mass{0.0};
    double eta{0.0};
};

/// An exactly enumerable binary classification task over nominal features.
class DiscreteJointSpec {
  public:
    DiscreteJointSpec() = default;
    /// Throws SchemaError unless masses are non-negative and sum to 1
    /// (within 1e-12), etas lie in [0,1], tuples are unique and in range.
    DiscreteJointSpec(std::vector<FeatureMeta> meta, std::vector<JointCell> cells);

    [[nodiscard]] std::size_t d() const noexcept { return meta_.size(); }
    [[nodiscard]] const std::vector<FeatureMeta> &meta() const noexcept { return meta_; }
    [[nodiscard]] const std::vector<JointCell> &cells() const noexcept { return cells_; }

    /// P(y=1 | x^{-j}) for every cell, in cell order. Cells in zero-mass
    /// groups get NaN (the conditional is undefined and carries no weight).
    [[nodiscard]] std::vector<double> eta_without(std::size_t j) const;

    /// Index of the cell matching a value tuple, or npos.
    [[nodiscard]] std::size_t find(std::span<const int> values) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  private:
    std::vector<FeatureMeta> meta_;
    std::vector<JointCell> cells_;
};

/// The criteria computed along both algebraic routes; the exact_* functions
/// return `value` after checking the routes agree.
struct RoutePair {
    double value{0.0};
    double alternate{0.0};
};

struct ScoreTriple {
    double s_s{0.0};
    double s_a{0.0};
    double s_b{0.0};
};

/// Absolute tolerance for the exact discrete identities.
inline constexpr double exact_tolerance = 1e-12;

/// Mean absolute change of eta when feature j is marginalized out.
/// `value` is the per-cell sum, `alternate` the expected within-group MAD.
[[nodiscard]] RoutePair exact_ss_routes(const DiscreteJointSpec &spec, std::size_t j);
/// `value` is twice the expected conditional variance of eta given x^{-j},
/// `alternate` the direct (2 eta - 1)(eta - eta^{-j}) integral.
[[nodiscard]] RoutePair exact_sa_routes(const DiscreteJointSpec &spec, std::size_t j);
/// `value` is the Bayes-accuracy difference, `alternate` the |eta - 1/2| form.
[[nodiscard]] RoutePair exact_sb_routes(const DiscreteJointSpec &spec, std::size_t j);

[[nodiscard]] double exact_ss(const DiscreteJointSpec &spec, std::size_t j);
[[nodiscard]] double exact_sa(const DiscreteJointSpec &spec, std::size_t j);
/// Clamped at 0 when rounding produces a value within -1e-12 of it.
[[nodiscard]] double exact_sb(const DiscreteJointSpec &spec, std::size_t j);
[[nodiscard]] ScoreTriple exact_scores(const DiscreteJointSpec &spec, std::size_t j);

/// Bayes-optimal accuracy E[max(eta, 1 - eta)].
[[nodiscard]] double bayes_accuracy(const DiscreteJointSpec &spec);

/// Uniform random masses and etas over the full product of `arities`.
/// Throws ConfigError if the product exceeds 10^6 cells.
[[nodiscard]] DiscreteJointSpec random_spec(std::size_t d, const std::vector<int> &arities, std::uint64_t seed);

/// The two-binary-feature worked example (masses 10,1,10,1 of 22).
[[nodiscard]] DiscreteJointSpec worked_example_spec();
/// Population of the five-feature ternary task, all 243 cells.
[[nodiscard]] DiscreteJointSpec nominal5_spec();

[[nodiscard]] nlohmann::json to_json(const DiscreteJointSpec &spec);
[[nodiscard]] DiscreteJointSpec spec_from_json(const nlohmann::json &doc);

/// Model backed by the true conditionals of a spec; predictions for tuples
/// outside the spec throw DomainError.
class TruthModel final : public ProbabilityModel {
  public:
    explicit TruthModel(DiscreteJointSpec spec);
    [[nodiscard]] double predict(const RowView &x) const override;
    [[nodiscard]] double predict_without(const RowView &x, std::size_t j) const override;

  private:
    std::size_t locate(const RowView &x) const;

    DiscreteJointSpec spec_;
    std::vector<std::vector<double>> eta_without_;
};

/// Draws n i.i.d. labeled examples from a spec.
[[nodiscard]] Dataset sample_spec(const DiscreteJointSpec &spec, std::size_t n, std::uint64_t seed);

/// Single Weston feature X_{c,p} with class prior pi, scored in isolation.
struct ContinuousTaskSpec {
    double c{0.0};
    double p{0.0};
    double pos_fraction{0.5};
    double lo{-8.0};
    double hi{8.0};
    double step{1e-3};

    /// Grid [-c-8, c+8] with the given step.
    static ContinuousTaskSpec with_default_grid(double c, double p, double pos_fraction, double step = 1e-3);
};

/// P(y=1|x) for the single-feature task.
[[nodiscard]] double continuous_eta(const ContinuousTaskSpec &task, double x);

/// S_S, S_A, S_B by composite trapezoid quadrature. Throws CoverageError when
/// more than 1e-10 of the mass lies outside [lo, hi], ConfigError on a bad grid.
[[nodiscard]] ScoreTriple quad_scores(const ContinuousTaskSpec &task);

}  // namespace probsel
