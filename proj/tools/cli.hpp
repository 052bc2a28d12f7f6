#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dse::cli {

/// Runs the command line `args` (args[0] is the program name). Data goes to
/// `out`, diagnostics to `err`. Returns the process exit status.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace dse::cli
