#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace valvebench::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2, kEscalation = 3 };

/// Parses and dispatches one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace valvebench::cli
