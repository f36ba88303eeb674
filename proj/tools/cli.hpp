#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrkit::cli {

enum ExitCode { Ok = 0, Usage = 1, Parse = 2, Invariant = 3 };

/// Runs one command line (without the program name). Everything the command
/// prints goes to out / err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lrkit::cli
