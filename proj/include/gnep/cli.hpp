#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gnep::cli {

inline constexpr const char *kToolVersion = "gnep 0.1.0";

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsageOrParse = 2,
  kSolverFailure = 3,
  kNotEquilibrium = 4,
  kDimensionMismatch = 5,
  kTooLarge = 6,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Entry point for main().
int run_main(int argc, char **argv);

} // namespace gnep::cli
