#pragma once

#include <string>
#include <vector>

namespace ltn {

// Full command-line entry point; returns the process exit code.
// 0 = success, 1 = usage / data errors, 2 = strict validation failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace ltn
