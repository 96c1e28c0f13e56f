#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace timberline::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

/// Runs one command. `args` excludes the program name. Tables go to `out`
/// (or --output); errors and diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace timberline::cli
