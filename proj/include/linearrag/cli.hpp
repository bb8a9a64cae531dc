#pragma once

#include <iosfwd>

#include "linearrag/error.hpp"

namespace linearrag {

/// Exit codes: 0 ok, 1 usage or configuration, 2 I/O or unusable input, 3 consistency.
int exit_code_for(ErrorCode code) noexcept;

/// Entry point of the `linearrag` binary with injectable streams.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linearrag
