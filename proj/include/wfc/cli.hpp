#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wfc {

// Exit codes, one per outcome category.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,    // validate found violations, or an unexpected failure
  kExitBadInput = 2,       // unreadable or malformed input, bad flags, unknown names
  kExitEmpty = 3,          // no plan, no satisfying candidate, nothing to rank
  kExitContradiction = 4,  // request set can never be satisfied
};

// Runs one verb; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wfc
