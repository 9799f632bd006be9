#pragma once

#include <string>
#include <vector>

namespace mft::cli {

// Entry point behind the binary; takes argv[1..] and returns the process
// exit code. Exit code 0 means the command completed; analysis outcomes
// (reject / accept) never affect it.
int run(const std::vector<std::string>& args);

}  // namespace mft::cli
