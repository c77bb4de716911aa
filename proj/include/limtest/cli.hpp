#pragma once

#include <string>
#include <vector>

namespace limtest {

// Exit codes: 0 success, 1 domain verdict failure (violation, regression,
// gate fail), 2 usage or parse error.
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, char** argv);

}  // namespace limtest
