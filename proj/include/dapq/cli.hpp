#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dapq {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidInput = 2,
  kExitInfeasible = 3,
  kExitNumerical = 4,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "start:stop:step", "start:stop" (step 1) or a single value.
std::vector<double> parse_sweep(const std::string& text);

}  // namespace dapq
