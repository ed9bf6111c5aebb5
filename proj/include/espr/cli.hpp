// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <iosfwd>

namespace espr {

inline constexpr const char* kToolVersion = "0.1.0";

/// Dispatches the esp-router command line. Returns the process exit code:
/// 0 success, 1 internal error, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace espr
