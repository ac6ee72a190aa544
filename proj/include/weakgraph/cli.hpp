#pragma once

#include <string>
#include <vector>

namespace weakgraph::cli {

// Runs one CLI invocation (args without the program name) and returns the
// process exit code: 0 success, 2 config error, 3 infeasible inference
// (informational), 4 numerical failure.
int run(const std::vector<std::string>& args);

} // namespace weakgraph::cli
