#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace eventflux::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// Runs one invocation. `args` excludes the program name. The JSON summary
/// line goes to `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eventflux::cli
