#pragma once

#include <iosfwd>

namespace samdde::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidation = 2;
inline constexpr int kSolver = 3;
inline constexpr int kVerification = 4;

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace samdde::cli
