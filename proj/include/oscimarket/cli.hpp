#pragma once

#include <string>
#include <vector>

namespace oscimarket::cli {

// Runs the command line (arguments without the program name) and returns the
// process exit code: 0 success, 1 validation/config error, 2 numerical
// failure.
int run(const std::vector<std::string>& args);

} // namespace oscimarket::cli
