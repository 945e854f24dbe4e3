#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace slump::cli {

// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;    // bad flags, config, paths, or data
inline constexpr int kExitNumeric = 3;  // non-finite loss or gradient
inline constexpr int kExitVerify = 4;   // gradient check above tolerance

// Runs one `slump` invocation. `args` excludes the program name. Regular
// output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slump::cli
