#pragma once

#include <ostream>

namespace fesf::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,       // unknown flag, missing argument
  kValidation = 3,  // bad parameter value, shape mismatch, invalid config
  kIo = 4,          // missing or unreadable file
  kTraining = 5,    // enhancer or classifier training diverged
};

/// Entry point of the fesf tool. Writes results to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fesf::cli
