#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rppg/error.hpp"

namespace rppg::cli {

/// Process exit codes, one per error family.
enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitUsage = 2,
  kExitMissingInput = 3,
  kExitInvalidInput = 4,
  kExitProcessing = 5,
  kExitOutput = 6,
};

int exit_code(ErrorFamily family);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rppg::cli
