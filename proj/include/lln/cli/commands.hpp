#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lln::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCertifyFailed = 1;
inline constexpr int kExitInputError = 2;

/// Runs lln-tail with `args` (program name excluded). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace lln::cli
