#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace portastat::cli {

/// Exit codes of every subcommand.
enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2, kNumericalError = 3 };

/// Runs `portastat <subcommand> [flags]`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace portastat::cli
