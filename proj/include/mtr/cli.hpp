#pragma once

#include <iosfwd>

namespace mtr {

/// Entry point of the `mtr` tool with injectable streams. Returns the
/// process exit code: 0 success, 1 configuration or input error, 2 when
/// some experiment cells failed.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mtr
