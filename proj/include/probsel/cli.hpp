#pragma once

#include <iosfwd>

namespace probsel {

/// Exit codes returned by cli_main.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_data = 2;
inline constexpr int exit_check_failed = 3;

/// Entry point behind the `probsel` binary. Subcommands: oracle, score, rfe,
/// loo, gen, exp. Results go to `out`, diagnostics to `err`.
int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace probsel
