#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latkit {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitBudget = 3 };

/// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latkit
