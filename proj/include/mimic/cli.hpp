#pragma once

#include <string>
#include <vector>

namespace mimic::cli {

/// Entry point behind the mimic-eval binary. Returns the process exit
/// code: 0 success, 1 validation failure, 2 gateway failure.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace mimic::cli
