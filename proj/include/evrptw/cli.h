#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evrptw {

enum ExitCode : int {
  kExitOk = 0,
  kExitInfeasible = 1,
  kExitInputError = 2,
  kExitGuardExceeded = 3,
};

// Entry point of the `evrptw` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evrptw
