#pragma once

#include <iosfwd>

namespace covsv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerdictFailed = 2;

// Command-line front end. Exit codes: 0 success, 2 a verdict failed (or H0
// was rejected), 1 any error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace covsv::cli
