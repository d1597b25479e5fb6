#pragma once

#include <iosfwd>

namespace cbir {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIo = 2, kExitData = 3 };

/// Entry point of the `cbir` binary: index | query | eval | serve.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cbir
