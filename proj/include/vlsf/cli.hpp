#pragma once

#include <iosfwd>

namespace vlsf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitValidation = 3;

/// Entry point of the `vlsf` tool (subcommands eval, sweep, validate).
/// Documents go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vlsf
