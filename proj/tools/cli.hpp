#pragma once

#include <ostream>

namespace bell_lab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUndefined = 3;

/// Entry point behind the `bell_lab` executable. Human-readable output goes
/// to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bell_lab::cli
