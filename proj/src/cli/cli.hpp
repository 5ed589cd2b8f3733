#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qbm::cli {

/// Exit codes: 0 success, 1 usage, 2 data, 3 numerical.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numerical = 3 };

/// Runs one command line (program name excluded). Progress goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qbm::cli
