#pragma once

#include <ostream>

namespace ehrenfest::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kNotSymmetric = 3,
  kCapExceeded = 4,
  kVerdictFailure = 5,
};

// Entry point of the `ehrenfest` tool. Reports go to `out` (or --out),
// diagnostics to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ehrenfest::cli
