#include "probsel/linear.hpp"

#include "probsel/error.hpp"
#include "probsel/numeric.hpp"
#include "probsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace probsel {

namespace {

void require_complete(const Dataset &ds, const char *who) {
    if (ds.has_missing()) {
        throw DataError(std::string(who) + " does not accept missing cells");
    }
}

double dot(const std::vector<double> &w, const RowView &x) {
    double z = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        z += w[j] * x[j];
    }
    return z;
}

double norm(const std::vector<double> &v) {
    double s = 0.0;
    for (const double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

void shuffle(std::vector<std::size_t> &v, Rng &rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto k = static_cast<std::size_t>(rng.uniform_int(i));
        std::swap(v[i - 1], v[k]);
    }
}

}  // namespace

double LinearModel::decision(const RowView &x) const {
    if (x.size() != weights.size()) {
        throw ShapeError("example has " + std::to_string(x.size()) + " features, model expects " +
                         std::to_string(weights.size()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x.is_missing(j)) {
            throw DataError("linear models cannot score missing cells");
        }
    }
    return dot(weights, x) + bias;
}

double logreg_objective(const Dataset &ds, const LinearModel &m, double l2) {
    CompensatedSum ll;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double z = m.decision(ds.row(i));
        const double t = ds.label(i) > 0 ? 1.0 : 0.0;
        ll += t * z - log1p_exp(z);
    }
    double penalty = 0.0;
    for (const double w : m.weights) {
        penalty += w * w;
    }
    return ll.value() / static_cast<double>(ds.n()) - 0.5 * l2 * penalty;
}

std::vector<double> logreg_gradient(const Dataset &ds, const LinearModel &m, double l2) {
    const std::size_t d = ds.d();
    std::vector<CompensatedSum> acc(d + 1);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const RowView r = ds.row(i);
        const double t = ds.label(i) > 0 ? 1.0 : 0.0;
        const double resid = t - sigmoid(m.decision(r));
        for (std::size_t j = 0; j < d; ++j) {
            acc[j] += resid * r[j];
        }
        acc[d] += resid;
    }
    std::vector<double> g(d + 1);
    const double n = static_cast<double>(ds.n());
    for (std::size_t j = 0; j < d; ++j) {
        g[j] = acc[j].value() / n - l2 * m.weights[j];
    }
    g[d] = acc[d].value() / n;
    return g;
}

LogisticFit logreg_fit(const Dataset &ds, double l2, std::size_t max_iters, double tol) {
    if (!(l2 >= 0.0) || !(tol > 0.0)) {
        throw ConfigError("logistic fit needs l2 >= 0 and tol > 0");
    }
    if (ds.count_label(1) == 0 || ds.count_label(-1) == 0) {
        throw FitError("logistic fit needs both classes present");
    }
    require_complete(ds, "logistic regression");
    const std::size_t d = ds.d();

    LinearModel m{std::vector<double>(d, 0.0), 0.0, LinearKind::logistic};
    double f = logreg_objective(ds, m, l2);
    std::vector<double> g = logreg_gradient(ds, m, l2);
    double step = 1.0;
    LogisticFit out;
    for (std::size_t it = 0; it < max_iters; ++it) {
        const double gnorm = norm(g);
        out.iterations = it;
        out.gradient_norm = gnorm;
        if (gnorm < tol) {
            out.converged = true;
            break;
        }
        LinearModel trial = m;
        double f_trial = f;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            for (std::size_t j = 0; j < d; ++j) {
                trial.weights[j] = m.weights[j] + step * g[j];
            }
            trial.bias = m.bias + step * g[d];
            f_trial = logreg_objective(ds, trial, l2);
            if (std::isfinite(f_trial) && f_trial >= f + 1e-4 * step * gnorm * gnorm) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        const std::vector<double> g_new = logreg_gradient(ds, trial, l2);
        // Barzilai-Borwein step for the next iteration (concave objective).
        double ss = 0.0;
        double sy = 0.0;
        for (std::size_t j = 0; j <= d; ++j) {
            const double s = (j < d ? trial.weights[j] - m.weights[j] : trial.bias - m.bias);
            const double y = g_new[j] - g[j];
            ss += s * s;
            sy += s * y;
        }
        step = sy < 0.0 ? std::clamp(ss / -sy, 1e-10, 1e10) : std::min(step * 2.0, 1e10);
        m = std::move(trial);
        f = f_trial;
        g = g_new;
        out.iterations = it + 1;
    }
    out.gradient_norm = norm(g);
    out.converged = out.converged || out.gradient_norm < tol;
    if (l2 == 0.0 && out.converged) {
        // Without a penalty, separable data has no maximizer: the small
        // gradient only reflects weights running off to infinity.
        bool separated = true;
        for (std::size_t i = 0; i < ds.n() && separated; ++i) {
            separated = ds.label(i) * m.decision(ds.row(i)) > 0.0;
        }
        out.converged = !separated;
    }
    out.model = std::move(m);
    return out;
}

double mean_hinge_loss(const Dataset &ds, const LinearModel &m) {
    CompensatedSum loss;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        loss += std::max(0.0, 1.0 - ds.label(i) * m.decision(ds.row(i)));
    }
    return ds.n() > 0 ? loss.value() / static_cast<double>(ds.n()) : 0.0;
}

double svm_objective(const Dataset &ds, const LinearModel &m, double lambda) {
    double sq = m.bias * m.bias;
    for (const double w : m.weights) {
        sq += w * w;
    }
    return 0.5 * lambda * sq + mean_hinge_loss(ds, m);
}

LinearModel svm_fit(const Dataset &ds, double lambda, std::size_t epochs, std::uint64_t seed) {
    if (!(lambda > 0.0) || epochs == 0) {
        throw ConfigError("svm fit needs lambda > 0 and epochs >= 1");
    }
    if (ds.n() == 0) {
        throw FitError("svm fit needs at least one example");
    }
    require_complete(ds, "svm");
    const std::size_t d = ds.d();
    const std::size_t total = epochs * ds.n();
    const std::size_t average_from = total / 2 + 1;
    const double radius = 1.0 / std::sqrt(lambda);

    // Last slot is the bias, trained as a weight on a constant 1 feature.
    std::vector<double> w(d + 1, 0.0);
    std::vector<double> avg(d + 1, 0.0);
    std::size_t averaged = 0;
    Rng rng(seed);
    for (std::size_t t = 1; t <= total; ++t) {
        const auto i = static_cast<std::size_t>(rng.uniform_int(ds.n()));
        const RowView r = ds.row(i);
        const double y = ds.label(i);
        double z = w[d];
        for (std::size_t j = 0; j < d; ++j) {
            z += w[j] * r[j];
        }
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double shrink = 1.0 - eta * lambda;
        for (double &wj : w) {
            wj *= shrink;
        }
        if (y * z < 1.0) {
            for (std::size_t j = 0; j < d; ++j) {
                w[j] += eta * y * r[j];
            }
            w[d] += eta * y;
        }
        const double len = norm(w);
        if (len > radius) {
            for (double &wj : w) {
                wj *= radius / len;
            }
        }
        if (t >= average_from) {
            ++averaged;
            const double k = static_cast<double>(averaged);
            for (std::size_t j = 0; j <= d; ++j) {
                avg[j] += (w[j] - avg[j]) / k;
            }
        }
    }
    LinearModel out;
    out.kind = LinearKind::hinge;
    out.weights.assign(avg.begin(), avg.begin() + static_cast<std::ptrdiff_t>(d));
    out.bias = avg[d];
    return out;
}

double PlattCalibration::probability(double margin) const {
    return sigmoid(-(a * margin + b));
}

PlattCalibration platt_fit(std::span<const double> margins, std::span<const int> labels) {
    if (margins.size() != labels.size()) {
        throw DomainError("platt_fit: margins and labels differ in length");
    }
    const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const auto n_neg = static_cast<double>(std::count(labels.begin(), labels.end(), -1));
    if (n_pos == 0.0 || n_neg == 0.0) {
        throw FitError("platt_fit needs examples of both classes");
    }
    const double hi_target = (n_pos + 1.0) / (n_pos + 2.0);
    const double lo_target = 1.0 / (n_neg + 2.0);
    const std::size_t n = margins.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(margins[i])) {
            throw FitError("platt_fit: non-finite margin");
        }
        t[i] = labels[i] > 0 ? hi_target : lo_target;
    }

    const auto objective = [&](double a, double b) {
        CompensatedSum f;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = margins[i] * a + b;
            f += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f.value();
    };

    constexpr std::size_t max_iter = 100;
    constexpr double min_step = 1e-10;
    constexpr double sigma = 1e-12;
    const double eps = 1e-10 * std::max(1.0, static_cast<double>(n));

    double a = 0.0;
    double b = std::log((n_neg + 1.0) / (n_pos + 1.0));
    double fval = objective(a, b);
    for (std::size_t it = 0; it < max_iter; ++it) {
        double h11 = sigma;
        double h22 = sigma;
        double h21 = 0.0;
        double g1 = 0.0;
        double g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = margins[i] * a + b;
            double p = 0.0;
            double q = 0.0;
            if (z >= 0.0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += margins[i] * margins[i] * d2;
            h22 += d2;
            h21 += margins[i] * d2;
            const double d1 = t[i] - p;
            g1 += margins[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) {
            break;
        }
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        bool moved = false;
        while (step >= min_step) {
            const double na = a + step * da;
            const double nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(fval)) {
            throw FitError("platt_fit: iteration left the finite range");
        }
        if (!moved) {
            break;
        }
    }
    return {a, b};
}

double LogisticModel::predict(const RowView &x) const {
    return sigmoid(model_.decision(x));
}

double SvmPlattModel::predict(const RowView &x) const {
    return calibration_.probability(svm_.decision(x));
}

SvmPlattModel svm_platt_fit(const Dataset &ds, double lambda, std::size_t epochs, std::uint64_t seed) {
    if (ds.count_label(1) == 0 || ds.count_label(-1) == 0) {
        throw FitError("svm_platt fit needs both classes present");
    }
    LinearModel full = svm_fit(ds, lambda, epochs, mix_seed(seed, {0}));

    constexpr std::size_t folds = 3;
    std::vector<std::size_t> fold_of(ds.n());
    Rng rng(mix_seed(seed, {1}));
    for (const int y : {-1, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            if (ds.label(i) == y) {
                members.push_back(i);
            }
        }
        shuffle(members, rng);
        for (std::size_t k = 0; k < members.size(); ++k) {
            fold_of[members[k]] = k % folds;
        }
    }

    std::vector<double> margins(ds.n());
    for (std::size_t k = 0; k < folds; ++k) {
        std::vector<std::size_t> train;
        std::vector<std::size_t> held;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            (fold_of[i] == k ? held : train).push_back(i);
        }
        if (held.empty()) {
            continue;
        }
        const Dataset part = ds.select_rows(train);
        // A single-class training part cannot define a separator; its fold
        // falls back to the full model's margins.
        const bool usable = part.count_label(1) > 0 && part.count_label(-1) > 0;
        const LinearModel fold_model = usable ? svm_fit(part, lambda, epochs, mix_seed(seed, {2, k})) : full;
        for (const std::size_t i : held) {
            margins[i] = fold_model.decision(ds.row(i));
        }
    }
    const PlattCalibration calibration = platt_fit(margins, ds.labels());
    return SvmPlattModel(std::move(full), calibration);
}

}  // namespace probsel
