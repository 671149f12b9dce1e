#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mathdef::cli {

/// Runs one subcommand. `argv[0]` is the program name. Output that a user
/// would read goes to `out`; diagnostics (one line per error) go to `err`.
///
/// Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 internal
/// invariant violation.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace mathdef::cli
