#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace greenshield::cli {

inline constexpr int kExitUsage = 2;

/// Exit status for a library error: 10 + the ErrorCode ordinal.
int exit_code_for(int error_code_ordinal);

/// Runs one CLI invocation. args[0] is the program name. Results go to
/// `out`; diagnostics, including the one-line `error: <code>: <message>`
/// on failure, go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace greenshield::cli
