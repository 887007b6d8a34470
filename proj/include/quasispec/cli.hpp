#pragma once

#include <ostream>

namespace quasispec {

/// Entry point of the `quasispec` tool. Returns the process exit code:
/// 0 success, 2 usage or invalid input, 3 numerical failure, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace quasispec
