#pragma once

// Command-line front end. Kept as a library so tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace cpd::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,  // bad input, bad flags, invalid game
    kExitAnalysis = 2,    // analysis precondition, cap, solver failure or failing check
};

/// Runs one command. `args` excludes the program name. The artifact goes to
/// --out when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpd::cli
