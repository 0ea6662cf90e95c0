#pragma once

#include <ostream>

namespace marma::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kValidation = 2,
  kNotConverged = 3,
  kIo = 4,
};

/// Entry point of the `marma` command; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace marma::cli
