#include "probsel/cli.hpp"

#include "probsel/dataset.hpp"
#include "probsel/error.hpp"
#include "probsel/estimator.hpp"
#include "probsel/experiments.hpp"
#include "probsel/oracle.hpp"
#include "probsel/rfe.hpp"
#include "probsel/scoring.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace probsel {

using nlohmann::json;

namespace {

json read_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Accepts either inline JSON or a path to a JSON file.
EstimatorConfig estimator_arg(const std::string &text) {
    if (text.empty()) {
        return {};
    }
    json doc;
    if (text.front() == '{') {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error &e) {
            throw ConfigError(std::string("inline estimator config is not valid JSON: ") + e.what());
        }
    } else {
        doc = read_json_file(text);
    }
    return EstimatorConfig::from_json(doc);
}

void write_text(const std::string &path, const std::string &text, std::ostream &out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path);
    if (!file) {
        throw DataError("cannot write '" + path + "'");
    }
    file << text;
}

std::string rfe_csv(const RfeTrace &trace) {
    std::ostringstream out;
    out << "step,removed,feature,score\n";
    out.precision(17);
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
        const RfeStep &step = trace.steps[s];
        for (std::size_t k = 0; k < step.scores.features.size(); ++k) {
            out << s << ',' << step.removed << ',' << step.scores.features[k] << ',' << step.scores.values[k] << '\n';
        }
    }
    return out.str();
}

struct DataArgs {
    std::string data;
    std::string unlabeled;
    std::string estimator;
    std::string criterion = "ss";
    std::string mode = "resub";
    std::string label_column = "label";

    [[nodiscard]] Dataset load() const {
        Dataset ds = load_csv(data, label_column);
        if (!unlabeled.empty()) {
            ds = ds.with_unlabeled(load_csv(unlabeled, label_column));
        }
        return ds;
    }
};

void add_data_options(CLI::App &cmd, DataArgs &args, bool scoring) {
    cmd.add_option("--data", args.data, "Training CSV (label column +1/-1, '?' for unlabeled)")->required();
    cmd.add_option("--estimator", args.estimator, "Estimator config: JSON file or inline JSON (default: nb)");
    cmd.add_option("--label-column", args.label_column, "Name of the label column");
    if (scoring) {
        cmd.add_option("--unlabeled", args.unlabeled, "Extra unlabeled rows for the ssu criterion");
        cmd.add_option("--criterion", args.criterion, "ss | sa | ssu | abs_loss_drop");
        cmd.add_option("--mode", args.mode, "resub | loo");
    }
}

}  // namespace

int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Probability-based feature scoring, selection and experiments", "probsel"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PROBSEL_VERSION);

    // oracle
    auto *oracle = app.add_subcommand("oracle", "Exact scores of a discrete joint distribution");
    std::string spec_path;
    std::string builtin;
    std::optional<std::size_t> oracle_feature;
    auto *spec_opt = oracle->add_option("--spec", spec_path, "Distribution JSON file");
    oracle->add_option("--builtin", builtin, "Built-in distribution: worked | nominal5")
        ->check(CLI::IsMember({"worked", "nominal5"}))
        ->excludes(spec_opt);
    oracle->add_option("--feature", oracle_feature, "Score only this feature (0-based)");

    // score
    auto *score = app.add_subcommand("score", "Score every feature of a dataset");
    DataArgs score_args;
    add_data_options(*score, score_args, true);

    // rfe
    auto *rfe = app.add_subcommand("rfe", "Recursive feature elimination");
    DataArgs rfe_args;
    std::string rfe_format = "json";
    add_data_options(*rfe, rfe_args, true);
    rfe->add_option("--format", rfe_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

    // loo
    auto *loo = app.add_subcommand("loo", "Leave-one-out classification errors");
    DataArgs loo_args;
    add_data_options(*loo, loo_args, false);

    // gen
    auto *gen = app.add_subcommand("gen", "Generate or export a dataset as CSV");
    gen->require_subcommand(1);
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    std::size_t gen_n = 100;
    gen->add_option("--out", gen_out, "Output CSV; the schema sidecar is written next to it");
    gen->add_option("--seed", gen_seed, "Random seed");
    auto *weston = gen->add_subcommand("weston", "Gaussian feature y(c+N(0,1)) with prob. p, else N(0,1)");
    double w_c = 1.0;
    double w_p = 0.7;
    double w_pi = 0.5;
    std::size_t w_noise = 0;
    weston->add_option("--n", gen_n, "Number of rows");
    weston->add_option("--c", w_c, "Class separation");
    weston->add_option("--p", w_p, "Probability the feature is informative")->check(CLI::Range(0.0, 1.0));
    weston->add_option("--pos-fraction", w_pi, "Share of positive labels");
    weston->add_option("--noise", w_noise, "Extra pure-noise Gaussian features");
    auto *nominal = gen->add_subcommand("nominal5", "Five ternary features, only x1 informative");
    std::string n_mode = "proportional";
    nominal->add_option("--n", gen_n, "Number of rows");
    nominal->add_option("--mode", n_mode, "proportional | oversample | undersample");
    auto *breast = gen->add_subcommand("breast", "Bundled breast-cancer data");
    bool b_binarize = false;
    std::size_t b_noise = 0;
    breast->add_flag("--binarize", b_binarize, "Threshold each feature to 0/1");
    breast->add_option("--noise", b_noise, "Append this many Bernoulli(1/2) noise features");
    for (CLI::App *sub : {weston, nominal, breast}) {
        sub->add_option("--out", gen_out, "Output CSV; the schema sidecar is written next to it");
        sub->add_option("--seed", gen_seed, "Random seed");
    }

    // exp
    auto *exp = app.add_subcommand("exp", "Run a configured experiment");
    std::string exp_config;
    std::string exp_out;
    std::string exp_format = "json";
    bool exp_check = false;
    exp->add_option("--config", exp_config, "Experiment config JSON")->required();
    exp->add_option("--out", exp_out, "Write the report here instead of standard output");
    exp->add_option("--format", exp_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    exp->add_flag("--check", exp_check, "Exit 3 unless every expectation flag passes");

    if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
        err << "unknown subcommand '" << argv[1] << "'\n\n" << app.help();
        return exit_usage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        if (*oracle) {
            if (spec_path.empty() && builtin.empty()) {
                throw ConfigError("oracle needs --spec or --builtin");
            }
            const DiscreteJointSpec spec = !builtin.empty()
                                               ? (builtin == "worked" ? worked_example_spec() : nominal5_spec())
                                               : spec_from_json(read_json_file(spec_path));
            const auto triple = [&](std::size_t j) {
                const ScoreTriple t = exact_scores(spec, j);
                return json{{"feature", j}, {"s_s", t.s_s}, {"s_a", t.s_a}, {"s_b", t.s_b}};
            };
            if (oracle_feature) {
                if (*oracle_feature >= spec.d()) {
                    throw ConfigError("--feature out of range");
                }
                out << triple(*oracle_feature).dump(2) << '\n';
            } else {
                json all = json::array();
                for (std::size_t j = 0; j < spec.d(); ++j) {
                    all.push_back(triple(j));
                }
                out << all.dump(2) << '\n';
            }
        } else if (*score) {
            const FeatureScores s =
                score_features(score_args.load(), estimator_arg(score_args.estimator),
                               criterion_from_string(score_args.criterion), scoring_mode_from_string(score_args.mode));
            out << s.to_json().dump(2) << '\n';
        } else if (*rfe) {
            const RfeTrace trace = rfe_run(rfe_args.load(), estimator_arg(rfe_args.estimator),
                                           criterion_from_string(rfe_args.criterion),
                                           scoring_mode_from_string(rfe_args.mode));
            out << (rfe_format == "csv" ? rfe_csv(trace) : trace.to_json().dump(2) + "\n");
        } else if (*loo) {
            out << loo_error(loo_args.load(), estimator_arg(loo_args.estimator)).to_json().dump(2) << '\n';
        } else if (*gen) {
            Dataset ds;
            if (*weston) {
                std::vector<WestonFeatureSpec> specs{{w_c, w_p, true}};
                specs.resize(1 + w_noise, WestonFeatureSpec{0.0, 0.0, false});
                ds = gen_weston(gen_n, specs, w_pi, gen_seed);
            } else if (*nominal) {
                ds = gen_nominal5(gen_n, sampling_mode_from_string(n_mode), gen_seed);
            } else {
                ds = load_csv(resolve_data_file("breast_cancer"));
                if (b_binarize) {
                    ds = binarize_breast(ds);
                }
                if (b_noise > 0) {
                    ds = augment_noise(ds, b_noise, gen_seed);
                }
            }
            if (gen_out.empty()) {
                throw ConfigError("gen needs --out (a schema file is written next to the CSV)");
            }
            write_csv(ds, gen_out);
        } else if (*exp) {
            const ExperimentReport report = run_experiment(read_json_file(exp_config));
            write_text(exp_out, exp_format == "csv" ? report.to_csv() : report.to_json().dump(2) + "\n", out);
            if (exp_check && !report.all_flags_pass()) {
                for (const auto &[name, ok] : report.flags.items()) {
                    if (!ok.get<bool>()) {
                        err << "check failed: " << name << '\n';
                    }
                }
                return exit_check_failed;
            }
        }
    } catch (const ConfigError &e) {
        err << "probsel: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error &e) {
        err << "probsel: " << e.what() << '\n';
        return exit_data;
    } catch (const json::exception &e) {
        err << "probsel: bad JSON: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_ok;
}

}  // namespace probsel
