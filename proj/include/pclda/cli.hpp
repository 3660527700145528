#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pclda {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumerical = 4,
};

/// Runs the `pclda` command line. `args` excludes the program name.
/// Subcommands: fit, predict, select-k, diagnose, simulate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pclda
