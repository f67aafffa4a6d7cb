#pragma once

#include <iosfwd>

namespace bowen {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitConfig = 2,
  kExitNoRepellingSeed = 3,
  kExitNoSignChange = 4,
  kExitCriticalPreimage = 5,
  kExitOscFail = 6,
};

// Parses argv, runs one subcommand and returns its exit code. Reports go to
// `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bowen
