#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cvxauction {

enum ExitCode { kOk = 0, kUsage = 1, kNumeric = 2, kIo = 3 };

/// Parses `args` (program name excluded) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvxauction
