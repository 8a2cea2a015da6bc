#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ris::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;  // e.g. `cell validate` on a failing band
inline constexpr int kExitUsage = 2;
inline constexpr int kExitError = 3;  // error JSON {code, message, context} on stderr

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Every leaf subcommand, space-separated for nested ones ("frames decode").
std::vector<std::string> command_names();

}  // namespace ris::cli
