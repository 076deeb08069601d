#pragma once

#include <iosfwd>
#include <string>

#include "qpalm/solver.hpp"

namespace qpalm {

/// Exit codes of the command line front end.
enum ExitCode : int { exit_ok = 0, exit_parse_error = 1, exit_solver_failure = 2 };

/// Entry point of the `qpalm` tool. Output goes to `out`, diagnostics to `err`.
///
///   qpalm solve <file> [settings flags] [--warm-start <file>]
///   qpalm generate {portfolio|mpc|random} [...] -o <file>
///   qpalm bench {portfolio|mpc|random} [...]
///   qpalm stats {sgm|profile} <records.csv>
///
/// The default time limit comes from the QPALM_TIME_LIMIT environment
/// variable when set.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// JSON document printed by `qpalm solve`.
std::string result_to_json(const SolveResult& result);

}  // namespace qpalm
