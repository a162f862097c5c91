#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace synodsim::cli {

inline constexpr std::string_view kVerdictsHeader = "synodsim-verdicts v1";
inline constexpr std::string_view kManifestHeader = "synodsim-manifest v1";

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kViolation = 1, kUsage = 2, kStateCap = 3 };

/// Entry point behind the `synodsim` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synodsim::cli
