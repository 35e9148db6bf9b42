#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace descfact_cli {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNumerical = 2,
  kExitNoSolution = 3,
  kExitVerification = 4,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace descfact_cli
