#pragma once

#include <vector>
#include <string>

namespace banditlab::cli {

/// Command-line front door. Subcommands: check, run, sweep, probe,
/// sample-env. Exit codes: 0 success, 2 config/usage error, 3 exhausted
/// sampling tries.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace banditlab::cli
