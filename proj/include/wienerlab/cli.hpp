#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wienerlab::cli {

// Runs one subcommand. `args` excludes the program name. Returns 0 on
// success, 2 on a usage or input-format error, 1 on a computation error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wienerlab::cli
