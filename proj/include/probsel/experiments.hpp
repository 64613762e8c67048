#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace probsel {

enum class ExperimentKind { sec41, fig2, fig3, fig4, table1 };

[[nodiscard]] std::string_view to_string(ExperimentKind kind);
[[nodiscard]] ExperimentKind experiment_from_string(std::string_view text);

/// Machine-readable experiment output. `results` and `summary` are pure
/// functions of `config`; timing lives in `meta` only.
struct ExperimentReport {
    nlohmann::json config;
    nlohmann::json results;
    nlohmann::json summary;
    /// Named pass/fail checks of the expected qualitative outcomes.
    nlohmann::json flags = nlohmann::json::object();
    nlohmann::json meta;

    [[nodiscard]] bool all_flags_pass() const;
    [[nodiscard]] nlohmann::json to_json() const;
    /// One row per entry of results["cells"].
    [[nodiscard]] std::string to_csv() const;
};

/// Full configuration for an experiment with every default filled in.
[[nodiscard]] nlohmann::json default_config(ExperimentKind kind);

/// Overlays `user` on the defaults for user["experiment"]; throws
/// ConfigError on unknown keys or invalid values.
[[nodiscard]] nlohmann::json resolve_config(const nlohmann::json &user);

/// Dispatches on config["experiment"].
[[nodiscard]] ExperimentReport run_experiment(const nlohmann::json &config);

[[nodiscard]] ExperimentReport run_sec41(const nlohmann::json &config);
[[nodiscard]] ExperimentReport run_fig2(const nlohmann::json &config);
[[nodiscard]] ExperimentReport run_fig3(const nlohmann::json &config);
[[nodiscard]] ExperimentReport run_fig4(const nlohmann::json &config);
[[nodiscard]] ExperimentReport run_table1(const nlohmann::json &config);

}  // namespace probsel
