#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ideal::cli {

enum ExitCode : int {
  kSuccess = 0,
  kCheckFailed = 1,
  kUsageError = 2,
  kIoError = 3,
};

// Entry point shared by the `ideal` binary and the tests. `args` excludes
// the program name. Never throws; errors become messages on `err` and a
// nonzero exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ideal::cli
