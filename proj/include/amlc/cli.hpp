#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace amlc {

/// Exit statuses of the `amlc` command.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitUsage = 2,
  kExitData = 3,
};

/// Runs one command line (args[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amlc
