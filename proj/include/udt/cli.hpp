#pragma once

#include <string>
#include <vector>

namespace udt {

/// Full command-line entry point. Exit codes: 0 success, 1 operational
/// failure, 2 usage/config error.
int run_cli(const std::vector<std::string>& argv);

}  // namespace udt
