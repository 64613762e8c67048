#include "probsel/error.hpp"
#include "probsel/estimator.hpp"
#include "probsel/linear.hpp"
#include "probsel/naive_bayes.hpp"
#include "probsel/numeric.hpp"
#include "probsel/oracle.hpp"
#include "probsel/rng.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>

using namespace probsel;

namespace {

Dataset one_feature(const std::vector<double> &xs, const std::vector<int> &ys, int arity = 2) {
    std::vector<std::vector<double>> rows;
    for (const double x : xs) {
        rows.push_back({x});
    }
    return {{FeatureMeta::nominal("x1", arity)}, rows, ys};
}

Dataset continuous(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<FeatureMeta> meta;
    for (std::size_t j = 0; j < d; ++j) {
        meta.push_back(FeatureMeta::continuous("x" + std::to_string(j + 1)));
    }
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<int> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            rows[i][j] = rng.normal();
            s += (static_cast<double>(j) - 1.0) * rows[i][j];
        }
        ys[i] = rng.bernoulli(sigmoid(s)) ? 1 : -1;
    }
    return {meta, rows, ys};
}

}  // namespace

TEST_SUITE("probmodels") {

TEST_CASE("naive Bayes: separated rows") {
    const Dataset ds = one_feature({0, 0, 1, 1}, {-1, -1, 1, 1});
    const std::vector<double> v{1.0};
    const std::vector<std::uint8_t> m{0};
    CHECK(nb_fit(ds, 0.0).predict(RowView{v, m}) == 1.0);
    CHECK(nb_fit(ds, 1.0).predict(RowView{v, m}) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("naive Bayes: hand-computed Laplace conditionals") {
    const NaiveBayesModel nb = nb_fit(one_feature({0, 0, 1, 1}, {-1, -1, 1, 1}), 1.0);
    CHECK(nb.priors()[0] == 0.5);
    CHECK(nb.priors()[1] == 0.5);
    CHECK(nb.conditional(0, 1, 1) == doctest::Approx(0.75));
    CHECK(nb.conditional(0, 0, 1) == doctest::Approx(0.25));
}

TEST_CASE("naive Bayes: dropping the only feature returns the prior") {
    const NaiveBayesModel nb = nb_fit(one_feature({0, 1, 1, 1, 0}, {-1, 1, 1, -1, -1}), 1.0);
    const std::vector<double> v{1.0};
    const std::vector<std::uint8_t> m{0};
    CHECK(nb.predict_without(RowView{v, m}, 0) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("naive Bayes: missing cells are skipped") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const Dataset ds({FeatureMeta::nominal("a", 2), FeatureMeta::nominal("b", 2)},
                     {{0, 0}, {0, 1}, {1, 1}, {1, nan}, {nan, 0}}, {-1, -1, 1, 1, -1});
    const NaiveBayesModel nb = nb_fit(ds, 1.0);
    // Class +1 has two rows, one with b missing: P(b=1|+) = (1+1)/(1+2).
    CHECK(nb.conditional(1, 1, 1) == doctest::Approx(2.0 / 3.0));
    const std::vector<double> v{1.0, 0.0};
    const std::vector<std::uint8_t> miss{0, 1};
    const std::vector<std::uint8_t> none{0, 0};
    // A missing cell contributes exactly what dropping the feature does.
    CHECK(nb.predict(RowView{v, miss}) == nb.predict_without(RowView{v, none}, 1));
}

TEST_CASE("naive Bayes: errors") {
    CHECK_THROWS_AS((void)nb_fit(one_feature({0, 1}, {1, 1}), 1.0), FitError);
    const Dataset cont({FeatureMeta::continuous("c")}, {{0.5}, {1.5}}, {1, -1});
    CHECK_THROWS_AS((void)nb_fit(cont, 1.0), TypeError);
    // alpha = 0 with a value unseen in both classes: both posteriors vanish.
    const NaiveBayesModel nb = nb_fit(one_feature({0, 1}, {1, -1}, 3), 0.0);
    const std::vector<double> v{2.0};
    const std::vector<std::uint8_t> m{0};
    CHECK_THROWS_AS((void)nb.predict(RowView{v, m}), DegenerateInputError);
}

TEST_CASE("naive Bayes: a label-independent feature predicts about 1/2") {
    Rng rng(8);
    std::vector<double> xs;
    std::vector<int> ys;
    for (int i = 0; i < 20000; ++i) {
        xs.push_back(static_cast<double>(rng.uniform_int(2)));
        ys.push_back(i % 2 == 0 ? 1 : -1);
    }
    const NaiveBayesModel nb = nb_fit(one_feature(xs, ys), 1.0);
    const std::vector<double> v{1.0};
    const std::vector<std::uint8_t> m{0};
    // P^ is a ratio of two frequencies each with SE about 0.5/sqrt(10000).
    CHECK(std::abs(nb.predict(RowView{v, m}) - 0.5) < 3.0 * 0.5 / std::sqrt(5000.0));
}

TEST_CASE("naive Bayes on the five-feature population") {
    const Dataset ds = gen_nominal5(100000, SamplingMode::proportional, 42);
    const NaiveBayesModel nb = nb_fit(ds, 1.0);
    const std::vector<double> v{0, 1, 1, 1, 1};
    const std::vector<std::uint8_t> m(5, 0);
    const RowView x{v, m};
    CHECK(std::abs(nb.predict(x) - 0.25) < 0.02);
    for (std::size_t j = 1; j < 5; ++j) {
        CHECK(std::abs(nb.predict(x) - nb.predict_without(x, j)) < 0.02);
    }
}

TEST_CASE("property: NB retrain equals factor drop at alpha = 0 on complete data") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const Dataset ds = testsupport::random_nominal(40, {2, 3, 2, 4}, mix_seed(99, {s}));
        EstimatorConfig drop{.estimator = EstimatorKind::nb, .alpha = 0.0};
        EstimatorConfig retrain = drop;
        retrain.removal = RemovalStrategy::retrain;
        const auto a = fit_estimator(ds, drop);
        const auto b = fit_estimator(ds, retrain);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            CHECK(a->predict(ds.row(i)) == b->predict(ds.row(i)));
            for (std::size_t j = 0; j < ds.d(); ++j) {
                CHECK(a->predict_without(ds.row(i), j) == b->predict_without(ds.row(i), j));
            }
        }
    }
}

TEST_CASE("property: logistic gradient matches central differences") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Dataset ds = continuous(60, 3, mix_seed(5, {s}));
        Rng rng(mix_seed(6, {s}));
        LinearModel m{{rng.normal(), rng.normal(), rng.normal()}, rng.normal(), LinearKind::logistic};
        const double l2 = 0.1;
        const std::vector<double> g = logreg_gradient(ds, m, l2);
        REQUIRE(g.size() == 4);
        double err = 0.0;
        double norm = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const double h = 1e-6;
            LinearModel up = m;
            LinearModel down = m;
            (k < 3 ? up.weights[k] : up.bias) += h;
            (k < 3 ? down.weights[k] : down.bias) -= h;
            const double fd = (logreg_objective(ds, up, l2) - logreg_objective(ds, down, l2)) / (2 * h);
            err += (g[k] - fd) * (g[k] - fd);
            norm += g[k] * g[k];
        }
        CHECK(std::sqrt(err / norm) < 1e-4);
    }
}

TEST_CASE("logistic fit: gradient below tolerance at the optimum") {
    const Dataset ds = continuous(300, 3, 17);
    const LogisticFit fit = logreg_fit(ds, 1e-3, 10000, 1e-8);
    CHECK(fit.converged);
    CHECK(fit.gradient_norm < 1e-8);
    const std::vector<double> g = logreg_gradient(ds, fit.model, 1e-3);
    double norm = 0.0;
    for (const double v : g) {
        norm += v * v;
    }
    CHECK(std::sqrt(norm) < 1e-8);
}

TEST_CASE("logistic fit: a label-independent feature") {
    Rng rng(3);
    std::vector<std::vector<double>> rows;
    std::vector<int> ys;
    for (int i = 0; i < 20000; ++i) {
        rows.push_back({rng.normal()});
        ys.push_back(i % 2 == 0 ? 1 : -1);
    }
    const Dataset ds({FeatureMeta::continuous("x")}, rows, ys);
    const LogisticFit fit = logreg_fit(ds, 1e-4, 10000, 1e-8);
    CHECK(std::abs(fit.model.weights[0]) < 0.05);
    const LogisticModel model(fit.model);
    CHECK(std::abs(model.predict(ds.row(0)) - 0.5) < 0.02);
}

TEST_CASE("logistic fit recovers the analytic posterior of a Gaussian pair") {
    const Dataset ds = gen_weston(10000, {{2.0, 1.0, true}}, 0.5, 12);
    const LogisticModel model(logreg_fit(ds, 1e-4, 10000, 1e-8).model);
    const ContinuousTaskSpec task = ContinuousTaskSpec::with_default_grid(2.0, 1.0, 0.5);
    double sq = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double diff = model.predict(ds.row(i)) - continuous_eta(task, ds.row(i)[0]);
        sq += diff * diff;
    }
    CHECK(std::sqrt(sq / static_cast<double>(ds.n())) < 0.05);
}

TEST_CASE("logistic fit: separable data without penalty is reported, not thrown") {
    const Dataset ds({FeatureMeta::continuous("x")}, {{-2}, {-1}, {1}, {2}}, {-1, -1, 1, 1});
    const LogisticFit fit = logreg_fit(ds, 0.0, 200, 1e-10);
    CHECK_FALSE(fit.converged);
    CHECK(fit.model.weights[0] > 0.0);
}

TEST_CASE("SVM: separable data, determinism and margin signs") {
    std::vector<std::vector<double>> rows;
    std::vector<int> ys;
    for (int i = 0; i < 100; ++i) {
        const double x = 2.0 + 0.02 * i;
        rows.push_back({x});
        ys.push_back(1);
        rows.push_back({-x});
        ys.push_back(-1);
    }
    const Dataset ds({FeatureMeta::continuous("x")}, rows, ys);
    const LinearModel a = svm_fit(ds, 1e-4, 50, 7);
    const LinearModel b = svm_fit(ds, 1e-4, 50, 7);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    CHECK(mean_hinge_loss(ds, a) < 1e-3);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        CHECK(a.decision(ds.row(i)) * ds.label(i) > 0.0);
    }
}

TEST_CASE("Platt: symmetric margins give 1/2 at zero") {
    std::vector<double> f;
    std::vector<int> y;
    for (int i = 1; i <= 50; ++i) {
        f.push_back(0.1 * i);
        y.push_back(1);
        f.push_back(-0.1 * i);
        y.push_back(-1);
    }
    const PlattCalibration cal = platt_fit(f, y);
    CHECK(std::abs(cal.probability(0.0) - 0.5) < 1e-6);
    CHECK(cal.a < 0.0);
    CHECK(cal.probability(-1.0) < cal.probability(1.0));
}

TEST_CASE("Platt: large correct margins push towards 0 and 1") {
    std::vector<double> f;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        f.push_back(i % 2 ? 10.0 : -10.0);
        y.push_back(i % 2 ? 1 : -1);
    }
    const PlattCalibration cal = platt_fit(f, y);
    // Smoothed targets cap the fit at logit(101/102) around |margin| = 10.
    CHECK(cal.a * 10.0 < -4.0);
    CHECK(cal.probability(10.0) > 0.98);
    CHECK(cal.probability(-10.0) < 0.02);
    CHECK_THROWS_AS((void)platt_fit(std::vector<double>{1.0}, std::vector<int>{1, -1}), DomainError);
}

TEST_CASE("Platt recovers a known sigmoid within 2% at n = 10^4") {
    // 100 margin levels with 100 rows each; positives follow the true
    // sigmoid exactly up to rounding, so the fit sees no sampling noise.
    const double a = -1.5;
    const double b = 0.4;
    std::vector<double> f;
    std::vector<int> y;
    for (int level = 0; level < 100; ++level) {
        const double margin = -4.0 + 8.0 * level / 99.0;
        const int pos = static_cast<int>(std::lround(100.0 * sigmoid(-(a * margin + b))));
        for (int r = 0; r < 100; ++r) {
            f.push_back(margin);
            y.push_back(r < pos ? 1 : -1);
        }
    }
    const PlattCalibration cal = platt_fit(f, y);
    CHECK(std::abs(cal.a - a) <= 0.02 * std::abs(a));
    CHECK(std::abs(cal.b - b) <= 0.02 * std::abs(b));
}

TEST_CASE("SVM with Platt: predictions are probabilities and deterministic") {
    const Dataset ds = gen_weston(300, {{1.0, 0.8, true}, {0.0, 0.0, false}}, 0.5, 14);
    const SvmPlattModel a = svm_platt_fit(ds, 1e-3, 20, 3);
    const SvmPlattModel b = svm_platt_fit(ds, 1e-3, 20, 3);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double p = a.predict(ds.row(i));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(p == b.predict(ds.row(i)));
    }
}

TEST_CASE("retrain removal: constant column and intercept-only model") {
    Rng rng(4);
    std::vector<std::vector<double>> rows;
    std::vector<int> ys;
    for (int i = 0; i < 400; ++i) {
        const double x = rng.normal();
        rows.push_back({x, 1.0});
        ys.push_back(rng.bernoulli(sigmoid(2.0 * x - 0.5)) ? 1 : -1);
    }
    const Dataset ds({FeatureMeta::continuous("x"), FeatureMeta::continuous("k")}, rows, ys);
    const EstimatorConfig cfg{.estimator = EstimatorKind::logreg, .removal = RemovalStrategy::retrain};
    const auto model = fit_estimator(ds, cfg);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(std::abs(model->predict(ds.row(i)) - model->predict_without(ds.row(i), 1)) < 1e-4);
    }
    const Dataset single = ds.select_columns(std::vector<std::size_t>{0});
    const double base_rate = static_cast<double>(single.count_label(1)) / static_cast<double>(single.n());
    CHECK(std::abs(predict_without_retrain(single, cfg, single.row(0), 0) - base_rate) < 1e-4);
}

TEST_CASE("estimator config validation and json") {
    EstimatorConfig bad{.estimator = EstimatorKind::logreg, .removal = RemovalStrategy::factor_drop};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    EstimatorConfig neg{.alpha = -1.0};
    CHECK_THROWS_AS(neg.validate(), ConfigError);
    const EstimatorConfig svm = EstimatorConfig::from_json({{"estimator", "svm_platt"}, {"lambda", 0.01}});
    CHECK(svm.removal == RemovalStrategy::retrain);
    CHECK(svm.lambda == 0.01);
    const EstimatorConfig back = EstimatorConfig::from_json(svm.to_json());
    CHECK(back.to_json() == svm.to_json());
    CHECK_THROWS_AS((void)EstimatorConfig::from_json({{"estimator", "forest"}}), ConfigError);
    CHECK_THROWS_AS((void)EstimatorConfig::from_json({{"estimator", "nb"}, {"colour", 1}}), ConfigError);
}

TEST_CASE("predictions are pure and in [0,1]") {
    const Dataset ds = testsupport::random_nominal(60, {2, 3, 3}, 5);
    for (const EstimatorKind kind : {EstimatorKind::nb, EstimatorKind::logreg, EstimatorKind::svm_platt}) {
        EstimatorConfig cfg{.estimator = kind};
        if (kind != EstimatorKind::nb) {
            cfg.removal = RemovalStrategy::retrain;
        }
        const auto model = fit_estimator(ds, cfg);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            const double p = model->predict(ds.row(i));
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            CHECK(p == model->predict(ds.row(i)));
            for (std::size_t j = 0; j < ds.d(); ++j) {
                const double q = model->predict_without(ds.row(i), j);
                CHECK(q >= 0.0);
                CHECK(q <= 1.0);
            }
        }
    }
}

}  // TEST_SUITE
