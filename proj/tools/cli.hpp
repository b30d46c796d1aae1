#pragma once

#include <ostream>

namespace dualpath::cli {

/// Exit codes of run().
inline constexpr int kExitConverged = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIterationCap = 2;
inline constexpr int kExitInvalidInstance = 3;
inline constexpr int kExitNumerical = 4;

/// Entry point of the `dualpath` tool: subcommands solve, gen-rpc, params
/// and verify.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dualpath::cli
