#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace rofleet::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataValidation = 2, kNumerical = 3 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "ROFLEET_OUT";

/// Every configurable value with its default. User configs are merged over
/// this document (RFC 7386 merge patch).
[[nodiscard]] nlohmann::json default_config();

/// Runs the command line; returns the process exit code. Diagnostics go to
/// `err`, informational output to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rofleet::cli
