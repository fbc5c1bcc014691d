#pragma once

#include <vector>
#include <string>

namespace grokmlp {

// Entry point behind the grokmlp binary; exposed so tests can drive the CLI
// in-process. Returns 0 on success, 1 on invalid input, 2 on runtime failure.
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, const char* const* argv);

}  // namespace grokmlp
