#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pgame {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitNegative = 1, kExitUsage = 2, kExitInternal = 3 };

/// Runs the `pgame` command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace pgame
