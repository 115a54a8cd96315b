#pragma once

#include <iosfwd>

namespace skillforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Entry point of the `skillforge` tool. Normal output goes to `out`,
/// diagnostics and usage text to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skillforge
