#pragma once

#include <string>
#include <vector>

namespace conesep {

/// Runs one CLI invocation (args exclude the program name).
/// Exit codes: 0 pass/success, 1 assertion failure, 2 usage or input error.
int cli_dispatch(const std::vector<std::string>& args);

} // namespace conesep
