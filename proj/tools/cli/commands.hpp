#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msr::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Runs one `msr` invocation. Results go to `out`; failures are reported on
// `err` as a single JSON object {"error": {"kind", "message", ...}} and
// mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msr::cli
