#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace fracpois::cli {

enum ExitCode : int {
    ok = 0,
    verification_failed = 1,
    usage_error = 2,
    numerical_failure = 3,
};

// Runs one command line (without the program name), writing records to `out`
// and diagnostics to `err`.  Returns the process exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace fracpois::cli
