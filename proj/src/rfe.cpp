#include "probsel/rfe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace probsel {

namespace {

/// Indices 0..k-1 sorted by descending key; ties go to the smaller feature id.
std::vector<std::size_t> order_desc(std::span<const double> keys, std::span<const std::size_t> ids) {
    std::vector<std::size_t> idx(keys.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) {
            return keys[a] > keys[b];
        }
        return ids[a] < ids[b];
    });
    return idx;
}

}  // namespace

std::vector<std::size_t> Ranking::positions() const {
    std::vector<std::size_t> pos(scores.features.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto it = std::find(scores.features.begin(), scores.features.end(), order[r]);
        pos[static_cast<std::size_t>(it - scores.features.begin())] = r + 1;
    }
    return pos;
}

nlohmann::json Ranking::to_json() const {
    return {{"order", order}, {"scores", scores.to_json()}};
}

Ranking rank(const FeatureScores &scores) {
    if (scores.values.empty()) {
        throw DomainError("cannot rank an empty score set");
    }
    if (scores.values.size() != scores.features.size()) {
        throw ShapeError("scores and feature ids differ in length");
    }
    for (const double v : scores.values) {
        if (!std::isfinite(v)) {
            throw DataError("cannot rank a non-finite score");
        }
    }
    Ranking out;
    out.scores = scores;
    for (const std::size_t k : order_desc(scores.values, scores.features)) {
        out.order.push_back(scores.features[k]);
    }
    return out;
}

nlohmann::json RfeTrace::to_json() const {
    nlohmann::json steps_json = nlohmann::json::array();
    for (const RfeStep &s : steps) {
        steps_json.push_back({{"removed", s.removed}, {"scores", s.scores.to_json()}});
    }
    return {{"steps", steps_json}, {"survivor_order", survivor_order}};
}

RfeTrace rfe_run(const Dataset &ds, const FeatureScorer &scorer) {
    if (ds.d() < 2) {
        throw DomainError("recursive elimination needs at least two features");
    }
    std::vector<std::size_t> alive(ds.d());
    std::iota(alive.begin(), alive.end(), std::size_t{0});
    RfeTrace trace;
    while (alive.size() > 1) {
        FeatureScores scores;
        try {
            scores = scorer(ds.select_columns(alive));
        } catch (const Error &e) {
            throw RfeAborted(std::string("elimination aborted: ") + e.what(), trace);
        }
        if (scores.values.size() != alive.size()) {
            throw ShapeError("scorer returned the wrong number of values");
        }
        scores.features = alive;
        std::size_t worst = 0;
        for (std::size_t k = 1; k < alive.size(); ++k) {
            // Strict < keeps the lowest index on ties.
            if (scores.values[k] < scores.values[worst]) {
                worst = k;
            }
        }
        if (!std::isfinite(scores.values[worst])) {
            throw RfeAborted("elimination aborted: non-finite score", trace);
        }
        trace.steps.push_back({alive[worst], std::move(scores)});
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    trace.survivor_order.push_back(alive.front());
    for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
        trace.survivor_order.push_back(it->removed);
    }
    return trace;
}

RfeTrace rfe_run(const Dataset &ds, const EstimatorConfig &cfg, Criterion criterion, ScoringMode mode) {
    return rfe_run(ds, [&](const Dataset &sub) { return score_features(sub, cfg, criterion, mode); });
}

nlohmann::json LooResult::to_json() const {
    return {{"errors", errors}, {"n", n}, {"degenerate_folds", degenerate_folds}};
}

LooResult loo_error(const Dataset &ds, const EstimatorConfig &cfg) {
    if (ds.n() < 2) {
        throw DomainError("leave-one-out needs at least two examples");
    }
    LooResult out;
    out.n = ds.n();
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const Dataset train = ds.without_row(i);
        int predicted = -1;
        if (train.count_label(1) == 0 || train.count_label(-1) == 0) {
            ++out.degenerate_folds;
            predicted = train.count_label(1) > 0 ? 1 : -1;
        } else {
            const auto model = fit_predictor(train, cfg);
            predicted = model->predict(ds.row(i)) > 0.5 ? 1 : -1;
        }
        if (predicted != ds.label(i)) {
            ++out.errors;
        }
    }
    return out;
}

nlohmann::json AggregateRanks::to_json() const {
    return {{"features", features}, {"mean_rank", mean_rank}, {"position", position}};
}

AggregateRanks aggregate_rank(std::span<const Ranking> rankings) {
    if (rankings.empty()) {
        throw DomainError("aggregate_rank needs at least one ranking");
    }
    std::vector<std::size_t> features = rankings.front().order;
    std::sort(features.begin(), features.end());
    std::vector<double> sum(features.size(), 0.0);
    for (const Ranking &r : rankings) {
        std::vector<std::size_t> ids = r.order;
        std::sort(ids.begin(), ids.end());
        if (ids != features) {
            throw DomainError("rankings cover different feature sets");
        }
        for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
            const auto k = static_cast<std::size_t>(std::lower_bound(features.begin(), features.end(), r.order[pos]) -
                                                    features.begin());
            sum[k] += static_cast<double>(pos + 1);
        }
    }
    AggregateRanks out;
    out.features = features;
    out.mean_rank.resize(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
        out.mean_rank[k] = sum[k] / static_cast<double>(rankings.size());
    }
    // Lower mean rank is better: sort ascending by mean, ties to lower id.
    std::vector<double> neg(out.mean_rank.size());
    std::transform(out.mean_rank.begin(), out.mean_rank.end(), neg.begin(), [](double m) { return -m; });
    const std::vector<std::size_t> order = order_desc(neg, features);
    out.position.resize(features.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        out.position[order[r]] = r + 1;
    }
    return out;
}

}  // namespace probsel
