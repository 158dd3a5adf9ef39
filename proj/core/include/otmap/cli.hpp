#pragma once

#include <string>
#include <vector>

namespace otmap {

// Parses argv and dispatches to the subcommands. Returns the process exit
// code: 0 success, 1 usage error, 2 numerical failure.
int run_cli(std::vector<std::string> args);
int run_cli(int argc, const char* const* argv);

}  // namespace otmap
