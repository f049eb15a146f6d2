#pragma once

#include <ostream>

namespace milattn {

// Entry point of the `milattn` tool. Progress and errors go to `err`,
// results to `out`. Returns the process exit status: 0 on success, 1 on a
// failed run or failed check, 2 on a usage error.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace milattn
