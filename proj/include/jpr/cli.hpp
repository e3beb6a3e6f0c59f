#pragma once

#include <iosfwd>

namespace jpr::cli {

/// Exit codes for the jpr tool.
enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kNotConverged = 2,
};

/// Entry point behind the `jpr` executable. Subcommands: estimate, bench, network.
/// Messages on `err` start with "error:" or "warning:".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jpr::cli
