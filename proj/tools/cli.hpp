#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace evemb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point behind the `evemb` binary. `args` excludes the program name.
/// Results go to `out`; the configuration banner and diagnostics go to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace evemb::cli
