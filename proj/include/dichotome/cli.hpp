#pragma once

#include <iosfwd>

namespace dichotome::cli {

enum ExitCode : int { kOk = 0, kRuntime = 1, kUsage = 2 };

/// Entry point of the `dichotome` tool. Diagnostics go to `err`, reports to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dichotome::cli
