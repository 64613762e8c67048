#pragma once

// Independent reference computations for the tests. Nothing here calls the
// grouping code under test; conditionals are found by brute-force pairwise
// scans over cells.

#include "probsel/dataset.hpp"
#include "probsel/model.hpp"
#include "probsel/oracle.hpp"
#include "probsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace testsupport {

struct BruteScores {
    double ss{0.0};
    double sa{0.0};
    double sb{0.0};
};

inline bool agree_off(const std::vector<int> &a, const std::vector<int> &b, std::size_t j) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (k != j && a[k] != b[k]) {
            return false;
        }
    }
    return true;
}

/// eta(x^{-j}) for every cell by an O(cells^2) scan.
inline std::vector<double> brute_eta_without(const probsel::DiscreteJointSpec &spec, std::size_t j) {
    const auto &cells = spec.cells();
    std::vector<double> out(cells.size(), 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        long double num = 0.0L;
        long double den = 0.0L;
        for (const auto &other : cells) {
            if (agree_off(cells[c].values, other.values, j)) {
                num += static_cast<long double>(other.mass) * other.eta;
                den += other.mass;
            }
        }
        out[c] = den > 0.0L ? static_cast<double>(num / den) : 0.0;
    }
    return out;
}

/// Definitions taken literally: mean |eta - eta_-j|, 2 E[(eta - eta_-j)^2]
/// and the drop in Bayes accuracy.
inline BruteScores brute_scores(const probsel::DiscreteJointSpec &spec, std::size_t j) {
    const std::vector<double> ej = brute_eta_without(spec, j);
    long double ss = 0.0L;
    long double sa = 0.0L;
    long double acc = 0.0L;
    long double acc_j = 0.0L;
    for (std::size_t c = 0; c < spec.cells().size(); ++c) {
        const auto &cell = spec.cells()[c];
        const long double diff = static_cast<long double>(cell.eta) - ej[c];
        ss += cell.mass * std::fabs(diff);
        sa += 2.0L * cell.mass * diff * diff;
        acc += cell.mass * std::max(cell.eta, 1.0 - cell.eta);
        // The reduced Bayes rule predicts +1 iff eta_-j > 1/2.
        acc_j += cell.mass * (ej[c] > 0.5 ? cell.eta : 1.0 - cell.eta);
    }
    return {static_cast<double>(ss), static_cast<double>(sa), static_cast<double>(acc - acc_j)};
}

/// A probability model given by explicit lookup tables over nominal rows:
/// full[x] and without[j][x], keyed by the mixed-radix code of the row.
class TableModel final : public probsel::ProbabilityModel {
  public:
    TableModel(std::vector<int> arities, std::vector<double> full, std::vector<std::vector<double>> without)
        : arities_(std::move(arities)), full_(std::move(full)), without_(std::move(without)) {}

    static TableModel random(const std::vector<int> &arities, std::uint64_t seed) {
        probsel::Rng rng(seed);
        std::size_t cells = 1;
        for (const int a : arities) {
            cells *= static_cast<std::size_t>(a);
        }
        std::vector<double> full(cells);
        for (double &p : full) {
            p = rng.uniform();
        }
        std::vector<std::vector<double>> without(arities.size(), std::vector<double>(cells));
        for (auto &table : without) {
            for (double &p : table) {
                p = rng.uniform();
            }
        }
        return TableModel(arities, std::move(full), std::move(without));
    }

    [[nodiscard]] double predict(const probsel::RowView &x) const override { return full_[code(x)]; }
    [[nodiscard]] double predict_without(const probsel::RowView &x, std::size_t j) const override {
        return without_.at(j)[code(x)];
    }

  private:
    [[nodiscard]] std::size_t code(const probsel::RowView &x) const {
        std::size_t c = 0;
        for (std::size_t k = 0; k < arities_.size(); ++k) {
            c = c * static_cast<std::size_t>(arities_[k]) + static_cast<std::size_t>(x[k]);
        }
        return c;
    }

    std::vector<int> arities_;
    std::vector<double> full_;
    std::vector<std::vector<double>> without_;
};

/// Uniform random nominal dataset; both classes are forced to appear.
inline probsel::Dataset random_nominal(std::size_t n, const std::vector<int> &arities, std::uint64_t seed) {
    probsel::Rng rng(seed);
    std::vector<probsel::FeatureMeta> meta;
    for (std::size_t j = 0; j < arities.size(); ++j) {
        meta.push_back(probsel::FeatureMeta::nominal("x" + std::to_string(j + 1), arities[j]));
    }
    std::vector<std::vector<double>> rows(n, std::vector<double>(arities.size()));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < arities.size(); ++j) {
            rows[i][j] = static_cast<double>(rng.uniform_int(static_cast<std::uint64_t>(arities[j])));
        }
        labels[i] = rng.bernoulli(0.5) ? 1 : -1;
    }
    labels[0] = 1;
    if (n > 1) {
        labels[1] = -1;
    }
    return {meta, rows, labels};
}

/// Scratch directory unique to one test.
inline std::filesystem::path scratch_dir(const std::string &name) {
    const auto dir = std::filesystem::temp_directory_path() / ("probsel_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testsupport
