#pragma once

#include <string>
#include <vector>

namespace prevcorr::cli {

// Runs the command-line front end; returns the process exit code
// (0 success, 1 numerical failure, 2 configuration or I/O error).
int run(const std::vector<std::string>& args);

}  // namespace prevcorr::cli
