#pragma once

#include <iosfwd>

namespace arena::cli {

inline constexpr const char* kVersion = "0.1.0";

// Full command dispatch: run, plot, oracle, list-envs.
// Exit codes: 0 success, 1 usage, 2 config, 3 runtime failure.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace arena::cli
