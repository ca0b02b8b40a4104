#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace elicit::cli {

/// Exit status: 0 success, 3 partial batch failure, 1 error, 2 usage.
inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kUsage = 2;
inline constexpr int kPartial = 3;

/// Runs the `elicit` command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace elicit::cli
