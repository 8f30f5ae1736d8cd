#pragma once

/// gbsing trace | census | verify | render --scene F [--grid N] [--jet-order K]
///
/// Exit codes: 0 success, 1 an identity failed, 2 bad input or a library
/// error (the message names the error kind and, where known, the location).

#include <iosfwd>

namespace gbs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitError = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gbs::cli
