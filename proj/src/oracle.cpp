#include "probsel/oracle.hpp"

#include "probsel/error.hpp"
#include "probsel/numeric.hpp"
#include "probsel/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace probsel {

namespace {

/// Cells sharing the same values off feature j.
struct Group {
    std::vector<std::size_t> cells;
    double mass{0.0};
    double eta{0.0};  // mass-weighted mean of eta; NaN for zero-mass groups
};

std::vector<Group> group_without(const DiscreteJointSpec &spec, std::size_t j) {
    if (j >= spec.d()) {
        throw DomainError("feature index " + std::to_string(j) + " out of range");
    }
    std::map<std::vector<int>, std::size_t> index;
    std::vector<Group> groups;
    const auto &cells = spec.cells();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<int> key = cells[c].values;
        key.erase(key.begin() + static_cast<std::ptrdiff_t>(j));
        const auto [it, inserted] = index.try_emplace(std::move(key), groups.size());
        if (inserted) {
            groups.emplace_back();
        }
        groups[it->second].cells.push_back(c);
    }
    for (Group &g : groups) {
        CompensatedSum mass;
        CompensatedSum weighted;
        for (const std::size_t c : g.cells) {
            mass += cells[c].mass;
            weighted += cells[c].mass * cells[c].eta;
        }
        g.mass = mass.value();
        g.eta = g.mass > 0.0 ? weighted.value() / g.mass : std::numeric_limits<double>::quiet_NaN();
    }
    return groups;
}

/// eta(x^{-j}) per cell, taken from its group.
std::vector<double> cell_group_eta(const DiscreteJointSpec &spec, const std::vector<Group> &groups) {
    std::vector<double> out(spec.cells().size(), std::numeric_limits<double>::quiet_NaN());
    for (const Group &g : groups) {
        for (const std::size_t c : g.cells) {
            out[c] = g.eta;
        }
    }
    return out;
}

RoutePair checked(RoutePair r, const char *name) {
    if (!(std::abs(r.value - r.alternate) <= exact_tolerance)) {
        throw Error(std::string(name) + ": algebraic routes disagree (" + std::to_string(r.value) + " vs " +
                    std::to_string(r.alternate) + ")");
    }
    return r;
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_tail(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

}  // namespace

DiscreteJointSpec::DiscreteJointSpec(std::vector<FeatureMeta> meta, std::vector<JointCell> cells)
    : meta_(std::move(meta)), cells_(std::move(cells)) {
    for (const FeatureMeta &f : meta_) {
        if (!f.is_nominal() || f.arity < 1) {
            throw SchemaError("joint spec features must be nominal ('" + f.name + "')");
        }
    }
    if (cells_.empty()) {
        throw SchemaError("joint spec has no cells");
    }
    std::set<std::vector<int>> seen;
    CompensatedSum total;
    for (const JointCell &c : cells_) {
        if (c.values.size() != meta_.size()) {
            throw SchemaError("cell tuple length does not match feature count");
        }
        for (std::size_t j = 0; j < c.values.size(); ++j) {
            if (c.values[j] < 0 || c.values[j] >= meta_[j].arity) {
                throw SchemaError("cell value out of range for feature '" + meta_[j].name + "'");
            }
        }
        if (!seen.insert(c.values).second) {
            throw SchemaError("duplicate cell tuple");
        }
        if (!(c.mass >= 0.0) || !std::isfinite(c.mass)) {
            throw SchemaError("cell mass must be a non-negative number");
        }
        if (!(c.eta >= 0.0 && c.eta <= 1.0)) {
            throw SchemaError("cell eta must lie in [0, 1]");
        }
        total += c.mass;
    }
    if (std::abs(total.value() - 1.0) > exact_tolerance) {
        throw SchemaError("cell masses sum to " + std::to_string(total.value()) + ", expected 1");
    }
}

std::vector<double> DiscreteJointSpec::eta_without(std::size_t j) const {
    return cell_group_eta(*this, group_without(*this, j));
}

std::size_t DiscreteJointSpec::find(std::span<const int> values) const {
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        if (std::equal(values.begin(), values.end(), cells_[c].values.begin(), cells_[c].values.end())) {
            return c;
        }
    }
    return npos;
}

RoutePair exact_ss_routes(const DiscreteJointSpec &spec, std::size_t j) {
    const std::vector<Group> groups = group_without(spec, j);
    const std::vector<double> eta_j = cell_group_eta(spec, groups);
    const auto &cells = spec.cells();

    CompensatedSum direct;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].mass > 0.0) {
            direct += cells[c].mass * std::abs(cells[c].eta - eta_j[c]);
        }
    }

    // Expected conditional MAD: within each group, weights p(x^j | x^{-j}).
    CompensatedSum grouped;
    for (const Group &g : groups) {
        if (!(g.mass > 0.0)) {
            continue;
        }
        CompensatedSum mean;
        for (const std::size_t c : g.cells) {
            mean += (cells[c].mass / g.mass) * cells[c].eta;
        }
        CompensatedSum mad;
        for (const std::size_t c : g.cells) {
            mad += (cells[c].mass / g.mass) * std::abs(cells[c].eta - mean.value());
        }
        grouped += g.mass * mad.value();
    }
    return {direct.value(), grouped.value()};
}

RoutePair exact_sa_routes(const DiscreteJointSpec &spec, std::size_t j) {
    const std::vector<Group> groups = group_without(spec, j);
    const std::vector<double> eta_j = cell_group_eta(spec, groups);
    const auto &cells = spec.cells();

    CompensatedSum variance_form;
    for (const Group &g : groups) {
        if (!(g.mass > 0.0)) {
            continue;
        }
        CompensatedSum mean;
        for (const std::size_t c : g.cells) {
            mean += (cells[c].mass / g.mass) * cells[c].eta;
        }
        CompensatedSum var;
        for (const std::size_t c : g.cells) {
            const double dev = cells[c].eta - mean.value();
            var += (cells[c].mass / g.mass) * dev * dev;
        }
        variance_form += 2.0 * g.mass * var.value();
    }

    CompensatedSum direct;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].mass > 0.0) {
            direct += cells[c].mass * (2.0 * cells[c].eta - 1.0) * (cells[c].eta - eta_j[c]);
        }
    }
    return {variance_form.value(), direct.value()};
}

RoutePair exact_sb_routes(const DiscreteJointSpec &spec, std::size_t j) {
    const std::vector<double> eta_j = spec.eta_without(j);
    const auto &cells = spec.cells();

    CompensatedSum with_j;
    CompensatedSum without_j;
    CompensatedSum centered;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const double p = cells[c].mass;
        if (!(p > 0.0)) {
            continue;
        }
        const double e = cells[c].eta;
        with_j += p * std::max(e, 1.0 - e);
        without_j += p * std::max(eta_j[c], 1.0 - eta_j[c]);
        centered += p * (std::abs(e - 0.5) - std::abs(eta_j[c] - 0.5));
    }
    return {with_j.value() - without_j.value(), centered.value()};
}

double exact_ss(const DiscreteJointSpec &spec, std::size_t j) {
    return checked(exact_ss_routes(spec, j), "exact_ss").value;
}

double exact_sa(const DiscreteJointSpec &spec, std::size_t j) {
    return checked(exact_sa_routes(spec, j), "exact_sa").value;
}

double exact_sb(const DiscreteJointSpec &spec, std::size_t j) {
    const double v = checked(exact_sb_routes(spec, j), "exact_sb").value;
    // Removing a feature cannot raise Bayes accuracy; only rounding goes below 0.
    if (v < 0.0 && v >= -exact_tolerance) {
        return 0.0;
    }
    return v;
}

ScoreTriple exact_scores(const DiscreteJointSpec &spec, std::size_t j) {
    return {exact_ss(spec, j), exact_sa(spec, j), exact_sb(spec, j)};
}

double bayes_accuracy(const DiscreteJointSpec &spec) {
    CompensatedSum acc;
    for (const JointCell &c : spec.cells()) {
        acc += c.mass * std::max(c.eta, 1.0 - c.eta);
    }
    return acc.value();
}

DiscreteJointSpec random_spec(std::size_t d, const std::vector<int> &arities, std::uint64_t seed) {
    if (arities.size() != d) {
        throw ConfigError("random_spec needs one arity per feature");
    }
    std::size_t cells = 1;
    for (const int a : arities) {
        if (a < 1) {
            throw ConfigError("random_spec arities must be positive");
        }
        cells *= static_cast<std::size_t>(a);
        if (cells > 1'000'000) {
            throw ConfigError("random_spec: more than 10^6 cells");
        }
    }
    std::vector<FeatureMeta> meta;
    for (std::size_t j = 0; j < d; ++j) {
        // Arity 1 is allowed here; nominal datasets need >= 2 but specs do not.
        meta.push_back({"x" + std::to_string(j + 1), FeatureKind::nominal, arities[j]});
    }
    Rng rng(seed);
    std::vector<JointCell> out(cells);
    CompensatedSum total;
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t rest = c;
        out[c].values.resize(d);
        for (std::size_t j = d; j-- > 0;) {
            out[c].values[j] = static_cast<int>(rest % static_cast<std::size_t>(arities[j]));
            rest /= static_cast<std::size_t>(arities[j]);
        }
        // (0, 1] keeps every cell strictly positive.
        out[c].mass = 1.0 - rng.uniform();
        out[c].eta = rng.uniform();
        total += out[c].mass;
    }
    for (JointCell &c : out) {
        c.mass /= total.value();
    }
    return DiscreteJointSpec(std::move(meta), std::move(out));
}

DiscreteJointSpec worked_example_spec() {
    std::vector<FeatureMeta> meta = {FeatureMeta::nominal("x1", 2), FeatureMeta::nominal("x2", 2)};
    std::vector<JointCell> cells = {
        {{0, 0}, 10.0 / 22.0, 0.495},
        {{0, 1}, 1.0 / 22.0, 0.0},
        {{1, 0}, 10.0 / 22.0, 0.825},
        {{1, 1}, 1.0 / 22.0, 0.0},
    };
    return DiscreteJointSpec(std::move(meta), std::move(cells));
}

DiscreteJointSpec nominal5_spec() {
    const auto &marginals = nominal5_marginals();
    const auto &eta = nominal5_eta();
    std::vector<FeatureMeta> meta;
    for (std::size_t j = 0; j < 5; ++j) {
        meta.push_back(FeatureMeta::nominal("x" + std::to_string(j + 1), 3));
    }
    std::vector<JointCell> cells;
    cells.reserve(243);
    for (int c = 0; c < 243; ++c) {
        JointCell cell;
        cell.values.resize(5);
        int rest = c;
        for (int j = 4; j >= 0; --j) {
            cell.values[static_cast<std::size_t>(j)] = rest % 3;
            rest /= 3;
        }
        cell.mass = 1.0;
        for (std::size_t j = 0; j < 5; ++j) {
            cell.mass *= marginals[j][static_cast<std::size_t>(cell.values[j])];
        }
        cell.eta = eta[static_cast<std::size_t>(cell.values[0])];
        cells.push_back(std::move(cell));
    }
    return DiscreteJointSpec(std::move(meta), std::move(cells));
}

nlohmann::json to_json(const DiscreteJointSpec &spec) {
    nlohmann::json features = nlohmann::json::array();
    for (const FeatureMeta &f : spec.meta()) {
        features.push_back({{"name", f.name}, {"arity", f.arity}});
    }
    nlohmann::json cells = nlohmann::json::array();
    for (const JointCell &c : spec.cells()) {
        cells.push_back({{"values", c.values}, {"mass", c.mass}, {"eta", c.eta}});
    }
    return {{"features", features}, {"cells", cells}};
}

DiscreteJointSpec spec_from_json(const nlohmann::json &doc) {
    try {
        std::vector<FeatureMeta> meta;
        for (const auto &f : doc.at("features")) {
            meta.push_back({f.at("name").get<std::string>(), FeatureKind::nominal, f.at("arity").get<int>()});
        }
        std::vector<JointCell> cells;
        for (const auto &c : doc.at("cells")) {
            cells.push_back({c.at("values").get<std::vector<int>>(), c.at("mass").get<double>(),
                             c.at("eta").get<double>()});
        }
        return DiscreteJointSpec(std::move(meta), std::move(cells));
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("bad joint spec document: ") + e.what());
    }
}

TruthModel::TruthModel(DiscreteJointSpec spec) : spec_(std::move(spec)) {
    for (std::size_t j = 0; j < spec_.d(); ++j) {
        eta_without_.push_back(spec_.eta_without(j));
    }
}

std::size_t TruthModel::locate(const RowView &x) const {
    if (x.size() != spec_.d()) {
        throw ShapeError("example width does not match the spec");
    }
    std::vector<int> key(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x.is_missing(j)) {
            throw DomainError("truth model cannot score missing cells");
        }
        key[j] = static_cast<int>(x[j]);
    }
    const std::size_t c = spec_.find(key);
    if (c == DiscreteJointSpec::npos) {
        throw DomainError("example is not a cell of the spec");
    }
    return c;
}

double TruthModel::predict(const RowView &x) const {
    return spec_.cells()[locate(x)].eta;
}

double TruthModel::predict_without(const RowView &x, std::size_t j) const {
    if (j >= spec_.d()) {
        throw DomainError("feature index out of range");
    }
    return eta_without_[j][locate(x)];
}

Dataset sample_spec(const DiscreteJointSpec &spec, std::size_t n, std::uint64_t seed) {
    const auto &cells = spec.cells();
    std::vector<double> cumulative(cells.size());
    double acc = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        acc += cells[c].mass;
        cumulative[c] = acc;
    }
    std::vector<FeatureMeta> meta;
    for (const FeatureMeta &f : spec.meta()) {
        meta.push_back(FeatureMeta::nominal(f.name, std::max(2, f.arity)));
    }
    Rng rng(seed);
    std::vector<std::vector<double>> rows(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) {
            --it;
        }
        const JointCell &cell = cells[static_cast<std::size_t>(it - cumulative.begin())];
        rows[i].assign(cell.values.begin(), cell.values.end());
        labels[i] = rng.bernoulli(cell.eta) ? 1 : -1;
    }
    return Dataset(std::move(meta), rows, std::move(labels));
}

ContinuousTaskSpec ContinuousTaskSpec::with_default_grid(double c, double p, double pos_fraction, double step) {
    const double reach = std::abs(c) + 8.0;
    return {c, p, pos_fraction, -reach, reach, step};
}

double continuous_eta(const ContinuousTaskSpec &task, double x) {
    const double base = normal_pdf(x);
    const double pos = task.pos_fraction * (task.p * normal_pdf(x - task.c) + (1.0 - task.p) * base);
    const double neg = (1.0 - task.pos_fraction) * (task.p * normal_pdf(x + task.c) + (1.0 - task.p) * base);
    const double f = pos + neg;
    return f > 0.0 ? pos / f : task.pos_fraction;
}

ScoreTriple quad_scores(const ContinuousTaskSpec &task) {
    const double pi = task.pos_fraction;
    if (!(task.lo < task.hi) || !(task.step > 0.0)) {
        throw ConfigError("quadrature grid needs lo < hi and step > 0");
    }
    if (!(pi > 0.0 && pi < 1.0) || !(task.p >= 0.0 && task.p <= 1.0)) {
        throw ConfigError("continuous task needs pos_fraction in (0,1) and p in [0,1]");
    }
    const auto outside = [&](double mu) { return normal_tail(mu - task.lo) + normal_tail(task.hi - mu); };
    const double tail = pi * (task.p * outside(task.c) + (1.0 - task.p) * outside(0.0)) +
                        (1.0 - pi) * (task.p * outside(-task.c) + (1.0 - task.p) * outside(0.0));
    if (tail > 1e-10) {
        throw CoverageError("quadrature grid leaves " + std::to_string(tail) + " of the mass uncovered");
    }

    const auto intervals = static_cast<std::size_t>(std::ceil((task.hi - task.lo) / task.step - 1e-9));
    const double h = (task.hi - task.lo) / static_cast<double>(intervals);
    const double bayes_without = std::max(pi, 1.0 - pi);
    CompensatedSum ss;
    CompensatedSum sa;
    CompensatedSum sb;
    for (std::size_t k = 0; k <= intervals; ++k) {
        const double x = task.lo + h * static_cast<double>(k);
        const double base = normal_pdf(x);
        const double pos = pi * (task.p * normal_pdf(x - task.c) + (1.0 - task.p) * base);
        const double neg = (1.0 - pi) * (task.p * normal_pdf(x + task.c) + (1.0 - task.p) * base);
        const double f = pos + neg;
        if (!(f > 0.0)) {
            continue;
        }
        const double eta = pos / f;
        const double w = (k == 0 || k == intervals) ? 0.5 * h : h;
        ss += w * std::abs(eta - pi) * f;
        sa += w * 2.0 * (eta - pi) * (eta - pi) * f;
        sb += w * (std::max(eta, 1.0 - eta) - bayes_without) * f;
    }
    return {ss.value(), sa.value(), sb.value()};
}

}  // namespace probsel
