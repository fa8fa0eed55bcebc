#pragma once

#include <iosfwd>

namespace helfrich {

/// Entry point of the command-line tool. Returns 0 on success, 1 on
/// validation failures (bad flags, bad input, failed checks) and 2 on
/// numerical failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace helfrich
