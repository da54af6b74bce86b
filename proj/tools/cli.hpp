#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace narvis::cli {

/// Runs one `narvis` command line. `args` excludes the program name.
/// Returns the process exit code: 0 on success, 1 for errors reported by the
/// core modules (printed as JSON on `err`), 2 for usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace narvis::cli
