#pragma once

#include <iosfwd>

namespace ncdkit {

/// Entry point of the `ncdkit` command-line tool. Returns the process exit
/// code: 0 on success (alerts and UNKNOWN classifications included), 1 on an
/// operational error, 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ncdkit
