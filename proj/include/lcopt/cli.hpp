#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lcopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInfeasible = 2;

/// Runs one `lcopt` invocation. args[0] is the program name. Output files
/// are written only when the command succeeds.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcopt::cli
