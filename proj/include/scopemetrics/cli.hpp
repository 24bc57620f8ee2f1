#pragma once

#include <string>
#include <vector>

namespace scopemetrics {

// Entry point behind the `scopemetrics` binary; args exclude the program
// name. Returns 0 on success, 1 on validation errors, 2 on I/O errors.
// Diagnostics go to stderr as one line: `ERROR <kind> <code>: <message>`.
// Artifacts are byte-identical across runs for identical inputs and flags.
int run_cli(const std::vector<std::string>& args);

}  // namespace scopemetrics
