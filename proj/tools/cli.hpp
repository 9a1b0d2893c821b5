#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pastis::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kRuntime = 2,
  kMismatch = 3,
};

/// Runs one command line; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pastis::cli
