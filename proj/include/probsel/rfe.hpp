#pragma once

#include "probsel/dataset.hpp"
#include "probsel/error.hpp"
#include "probsel/estimator.hpp"
#include "probsel/scoring.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <span>
#include <vector>

namespace probsel {

/// Features ordered best first (descending score, ties to the lower index).
struct Ranking {
    std::vector<std::size_t> order;
    FeatureScores scores;

    /// 1-based rank of each feature, indexed by position in scores.features.
    [[nodiscard]] std::vector<std::size_t> positions() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Throws DataError on a non-finite score and DomainError on empty scores.
[[nodiscard]] Ranking rank(const FeatureScores &scores);

struct RfeStep {
    std::size_t removed{0};
    FeatureScores scores;
};

struct RfeTrace {
    std::vector<RfeStep> steps;
    /// Best first: the final survivor, then the removed features in reverse.
    std::vector<std::size_t> survivor_order;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Raised when a refit fails mid-run; carries the steps completed so far.
class RfeAborted : public Error {
  public:
    RfeAborted(const std::string &what, RfeTrace partial) : Error(what), partial_(std::move(partial)) {}
    [[nodiscard]] const RfeTrace &partial() const noexcept { return partial_; }

  private:
    RfeTrace partial_;
};

/// Scores the columns of a (sub)dataset; values are indexed by column.
using FeatureScorer = std::function<FeatureScores(const Dataset &)>;

/// Greedy backward elimination: score the survivors, drop the lowest
/// (ties to the lowest original index), repeat until one feature remains.
[[nodiscard]] RfeTrace rfe_run(const Dataset &ds, const FeatureScorer &scorer);
[[nodiscard]] RfeTrace rfe_run(const Dataset &ds, const EstimatorConfig &cfg, Criterion criterion, ScoringMode mode);

struct LooResult {
    std::size_t errors{0};
    std::size_t n{0};
    /// Folds whose training part lacked a class; predicted from the prior alone.
    std::size_t degenerate_folds{0};

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Predicts +1 iff P^ > 1/2 for each held-out example.
[[nodiscard]] LooResult loo_error(const Dataset &ds, const EstimatorConfig &cfg);

struct AggregateRanks {
    std::vector<std::size_t> features;
    std::vector<double> mean_rank;
    /// 1-based position after ranking the means (ties to the lower index).
    std::vector<std::size_t> position;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Throws DomainError when the rankings cover different feature sets.
[[nodiscard]] AggregateRanks aggregate_rank(std::span<const Ranking> rankings);

}  // namespace probsel
