#include "probsel/dataset.hpp"
#include "probsel/error.hpp"
#include "probsel/rng.hpp"

namespace probsel {

const std::vector<std::vector<double>> &nominal5_marginals() {
    static const std::vector<std::vector<double>> marginals = {
        {1.0 / 4, 1.0 / 2, 1.0 / 4},
        {1.0 / 4, 1.0 / 2, 1.0 / 4},
        {1.0 / 3, 1.0 / 3, 1.0 / 3},
        {1.0 / 3, 1.0 / 6, 1.0 / 2},
        {1.0 / 2, 1.0 / 4, 1.0 / 4},
    };
    return marginals;
}

const std::vector<double> &nominal5_eta() {
    static const std::vector<double> eta = {1.0 / 4, 1.0 / 2, 3.0 / 4};
    return eta;
}

Dataset gen_weston(std::size_t n, const std::vector<WestonFeatureSpec> &specs, double pos_fraction,
                   std::uint64_t seed) {
    if (specs.empty()) {
        throw ConfigError("gen_weston needs at least one feature spec");
    }
    if (n == 0) {
        throw ConfigError("gen_weston needs n >= 1");
    }
    if (!(pos_fraction > 0.0 && pos_fraction < 1.0)) {
        throw ConfigError("pos_fraction must lie in (0, 1)");
    }
    for (const WestonFeatureSpec &s : specs) {
        if (!(s.p >= 0.0 && s.p <= 1.0) || !(s.c >= 0.0)) {
            throw ConfigError("Weston feature needs c >= 0 and p in [0, 1]");
        }
    }
    std::vector<FeatureMeta> meta;
    for (std::size_t j = 0; j < specs.size(); ++j) {
        meta.push_back(FeatureMeta::continuous("x" + std::to_string(j + 1)));
    }
    Rng rng(seed);
    std::vector<std::vector<double>> rows(n, std::vector<double>(specs.size()));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = rng.bernoulli(pos_fraction) ? 1 : -1;
        labels[i] = y;
        for (std::size_t j = 0; j < specs.size(); ++j) {
            const WestonFeatureSpec &s = specs[j];
            if (s.informative && rng.bernoulli(s.p)) {
                rows[i][j] = static_cast<double>(y) * (s.c + rng.normal());
            } else {
                rows[i][j] = rng.normal();
            }
        }
    }
    return Dataset(std::move(meta), rows, std::move(labels));
}

Dataset gen_nominal5(std::size_t n, SamplingMode mode, std::uint64_t seed) {
    if (n == 0) {
        throw ConfigError("gen_nominal5 needs n >= 1");
    }
    const auto &marginals = nominal5_marginals();
    const auto &eta = nominal5_eta();
    std::vector<double> first = marginals[0];
    if (mode == SamplingMode::oversample) {
        first = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    } else if (mode == SamplingMode::undersample) {
        first = {1.0 / 8, 3.0 / 4, 1.0 / 8};
    }
    std::vector<FeatureMeta> meta;
    for (std::size_t j = 0; j < 5; ++j) {
        meta.push_back(FeatureMeta::nominal("x" + std::to_string(j + 1), 3));
    }
    Rng rng(seed);
    std::vector<std::vector<double>> rows(n, std::vector<double>(5));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = rng.categorical(first);
        rows[i][0] = static_cast<double>(a);
        labels[i] = rng.bernoulli(eta[a]) ? 1 : -1;
        for (std::size_t j = 1; j < 5; ++j) {
            rows[i][j] = static_cast<double>(rng.categorical(marginals[j]));
        }
    }
    return Dataset(std::move(meta), rows, std::move(labels));
}

}  // namespace probsel
