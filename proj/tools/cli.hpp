#pragma once

#include <iosfwd>

namespace cmc::cli {

/// Exit codes of every subcommand.
enum ExitCode : int {
    kOk = 0,
    kSolverFailure = 1,  ///< Newton / continuation did not converge
    kConfigError = 2,    ///< bad arguments, config, hypothesis or schema
    kDiagnosticsFailure = 3,
};

/// Entry point shared by the executable and the tests. Subcommands:
///
///   radial  --t0 T [--n N] [--r0 R] [--model M] [--samples K] [--out FILE]
///   solve   CONFIG [--quiet]
///   verify  FIELD_STEM CONFIG [--dual] [--out FILE]
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cmc::cli
