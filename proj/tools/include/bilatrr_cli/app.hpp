#pragma once

#include <iosfwd>

namespace bilatrr::cli {

/// Entry point of the bilatrr tool. Reports go to out, diagnostics to err.
/// Returns 0 on success, 1 on usage, I/O or schema errors and 2 when
/// estimation fails.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bilatrr::cli
