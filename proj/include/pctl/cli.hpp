#pragma once

#include <iosfwd>

namespace pctl {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitFailure = 2,  // non-convergence or systemic failure
  kExitBreach = 3,   // safety invariant broken by a controlled run
};

/// Entry point of the pcontrol binary; writes results to `out` (or the -o
/// file) and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pctl
